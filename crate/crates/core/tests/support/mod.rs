//! Shared test support: an independent straight-line oracle for every
//! formula, raw fixture loading, and seeded random input generators.
//!
//! The oracle never calls into the library's scoring/cascade/uncertainty
//! code paths: it recomputes everything with plain loops over plain vectors,
//! parsed directly out of the JSON fixtures. Golden files are produced from
//! the oracle and frozen; the implementation is compared against them.

// Each test target compiles this module; not every target uses every helper.
#![allow(dead_code)]
// The oracle is deliberately written as plain index loops, and spells the
// clip function out as min(1, max(0, x)).
#![allow(clippy::needless_range_loop)]
#![allow(clippy::manual_clamp)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::Value;

pub const LAYER_CODES: [&str; 7] = ["P", "SP", "DP", "MW", "DM", "AP", "SI"];

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn fixture_platforms() -> [&'static str; 3] {
    ["warehouse-tug", "clinic-assistant", "lobby-greeter"]
}

fn layer_ordinal(code: &str) -> usize {
    LAYER_CODES
        .iter()
        .position(|&c| c == code)
        .expect("known layer code")
}

// ---------------------------------------------------------------------------
// Raw fixture parsing (independent of the library's types).
// ---------------------------------------------------------------------------

pub struct RawCatalog {
    pub attack_ids: Vec<String>,
    pub attack_layers: Vec<usize>,
    pub lambda: Vec<f64>,
    pub iota: Vec<f64>,
    pub delta: Vec<f64>,
    pub defense_ids: Vec<String>,
    pub defense_layers: Vec<usize>,
    pub gamma: Vec<Vec<f64>>,
}

pub struct RawAssessment {
    pub platform: String,
    /// 0/1 per attack, catalog order.
    pub z: Vec<f64>,
    /// Per defense, catalog order.
    pub mu: Vec<f64>,
    /// Overrides already applied.
    pub lambda: Vec<f64>,
    pub iota: Vec<f64>,
}

pub struct RawCoupling {
    pub alpha: f64,
    pub beta: f64,
    pub s: Vec<Vec<f64>>,
    pub e: Vec<Vec<f64>>,
    pub m: Vec<Vec<f64>>,
}

fn as_f64(v: &Value) -> f64 {
    v.as_f64().expect("numeric field")
}

fn matrix_of(v: &Value) -> Vec<Vec<f64>> {
    v.as_array()
        .expect("matrix rows")
        .iter()
        .map(|row| row.as_array().expect("matrix row").iter().map(as_f64).collect())
        .collect()
}

pub fn load_raw_catalog(path: &Path) -> RawCatalog {
    let doc: Value = serde_json::from_slice(&std::fs::read(path).expect("catalog file"))
        .expect("catalog json");
    let attacks = doc["attacks"].as_array().expect("attacks");
    let defenses = doc["defenses"].as_array().expect("defenses");
    RawCatalog {
        attack_ids: attacks.iter().map(|a| a["id"].as_str().unwrap().to_string()).collect(),
        attack_layers: attacks
            .iter()
            .map(|a| layer_ordinal(a["layer"].as_str().unwrap()))
            .collect(),
        lambda: attacks.iter().map(|a| as_f64(&a["likelihood"])).collect(),
        iota: attacks.iter().map(|a| as_f64(&a["impact"])).collect(),
        delta: attacks
            .iter()
            .map(|a| a.get("detectability").map_or(1.0, as_f64))
            .collect(),
        defense_ids: defenses.iter().map(|d| d["id"].as_str().unwrap().to_string()).collect(),
        defense_layers: defenses
            .iter()
            .map(|d| layer_ordinal(d["layer"].as_str().unwrap()))
            .collect(),
        gamma: matrix_of(&doc["gamma"]),
    }
}

pub fn load_raw_assessment(path: &Path, catalog: &RawCatalog) -> RawAssessment {
    let doc: Value = serde_json::from_slice(&std::fs::read(path).expect("assessment file"))
        .expect("assessment json");
    let z = catalog
        .attack_ids
        .iter()
        .map(|id| as_f64(&doc["applicability"][id]))
        .collect();
    let mu = catalog
        .defense_ids
        .iter()
        .map(|id| as_f64(&doc["implementation"][id]))
        .collect();
    let mut lambda = catalog.lambda.clone();
    let mut iota = catalog.iota.clone();
    if let Some(overrides) = doc.get("overrides").and_then(Value::as_object) {
        for (id, entry) in overrides {
            let i = catalog.attack_ids.iter().position(|a| a == id).expect("known id");
            if let Some(l) = entry.get("likelihood") {
                lambda[i] = as_f64(l);
            }
            if let Some(v) = entry.get("impact") {
                iota[i] = as_f64(v);
            }
        }
    }
    RawAssessment {
        platform: doc["platform"].as_str().unwrap().to_string(),
        z,
        mu,
        lambda,
        iota,
    }
}

pub fn load_raw_coupling(path: &Path) -> RawCoupling {
    let doc: Value = serde_json::from_slice(&std::fs::read(path).expect("coupling file"))
        .expect("coupling json");
    RawCoupling {
        alpha: doc.get("alpha").map_or(0.6, as_f64),
        beta: doc.get("beta").map_or(0.4, as_f64),
        s: matrix_of(&doc["S"]),
        e: matrix_of(&doc["E"]),
        m: matrix_of(&doc["M"]),
    }
}

// ---------------------------------------------------------------------------
// Scoring oracle.
// ---------------------------------------------------------------------------

pub struct OracleScore {
    pub omega: Vec<f64>,
    pub omega_adjusted: Vec<f64>,
    pub kappa: Vec<f64>,
    pub aggregate_percent: f64,
    /// Indexed by layer ordinal.
    pub layer_scores: [f64; 7],
}

/// Straight-line pipeline: ω = λι, ω̃ = Zω, ε = γμ, κ = 1−Π(1−ε),
/// aggregate = Σω̃κ/Σω̃·100, layer score = the same over resident columns ·5.
/// Returns None when Σω̃ = 0.
pub fn oracle_score(
    lambda: &[f64],
    iota: &[f64],
    z: &[f64],
    gamma: &[Vec<f64>],
    mu: &[f64],
    defense_layers: &[usize],
) -> Option<OracleScore> {
    let n = lambda.len();
    let d = mu.len();
    let mut omega = vec![0.0; n];
    let mut omega_adjusted = vec![0.0; n];
    for i in 0..n {
        omega[i] = lambda[i] * iota[i];
        omega_adjusted[i] = z[i] * omega[i];
    }
    let mut epsilon = vec![vec![0.0; d]; n];
    for i in 0..n {
        for j in 0..d {
            epsilon[i][j] = gamma[i][j] * mu[j];
        }
    }
    let mut kappa = vec![0.0; n];
    for i in 0..n {
        let mut product = 1.0;
        for j in 0..d {
            product *= 1.0 - epsilon[i][j];
        }
        kappa[i] = 1.0 - product;
    }
    let mut denominator = 0.0;
    for i in 0..n {
        denominator += omega_adjusted[i];
    }
    if denominator == 0.0 {
        return None;
    }
    let mut numerator = 0.0;
    for i in 0..n {
        numerator += omega_adjusted[i] * kappa[i];
    }
    let aggregate_percent = numerator / denominator * 100.0;

    let mut layer_scores = [0.0; 7];
    for (ell, slot) in layer_scores.iter_mut().enumerate() {
        let mut num = 0.0;
        for i in 0..n {
            let mut product = 1.0;
            for j in 0..d {
                if defense_layers[j] == ell {
                    product *= 1.0 - epsilon[i][j];
                }
            }
            num += omega_adjusted[i] * (1.0 - product);
        }
        *slot = num / denominator * 5.0;
    }
    Some(OracleScore {
        omega,
        omega_adjusted,
        kappa,
        aggregate_percent,
        layer_scores,
    })
}

// ---------------------------------------------------------------------------
// Cascade oracle.
// ---------------------------------------------------------------------------

pub fn oracle_coupling(c: &RawCoupling) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; 7]; 7];
    for i in 0..7 {
        for j in 0..7 {
            if i == j {
                d[i][j] = 1.0;
            } else {
                let blended = c.alpha * c.s[i][j] + c.beta * c.e[i][j];
                let v = blended * (1.0 - c.m[i][j]);
                d[i][j] = v.min(1.0).max(0.0);
            }
        }
    }
    d
}

#[derive(Debug, Clone, PartialEq)]
pub struct OraclePath {
    pub triple: (usize, usize, usize),
    pub hops: (f64, f64),
    pub strength: f64,
}

impl OraclePath {
    pub fn label(&self) -> String {
        format!(
            "{}->{}->{}",
            LAYER_CODES[self.triple.0],
            LAYER_CODES[self.triple.1],
            LAYER_CODES[self.triple.2]
        )
    }

    fn codes(&self) -> [&'static str; 3] {
        [
            LAYER_CODES[self.triple.0],
            LAYER_CODES[self.triple.1],
            LAYER_CODES[self.triple.2],
        ]
    }
}

/// Exhaustive ordered-triple enumeration with the documented gates and sort.
pub fn oracle_paths(
    d: &[Vec<f64>],
    epsilon_hop: f64,
    min_prop: f64,
    distinct_endpoints: bool,
) -> Vec<OraclePath> {
    let mut out = Vec::new();
    for i in 0..7 {
        for j in 0..7 {
            for k in 0..7 {
                if i == j || j == k {
                    continue;
                }
                if distinct_endpoints && i == k {
                    continue;
                }
                let (a, b) = (d[i][j], d[j][k]);
                if a < epsilon_hop || b < epsilon_hop {
                    continue;
                }
                let p = a * b;
                if p < min_prop {
                    continue;
                }
                out.push(OraclePath {
                    triple: (i, j, k),
                    hops: (a, b),
                    strength: p,
                });
            }
        }
    }
    out.sort_by(|x, y| {
        y.strength
            .partial_cmp(&x.strength)
            .unwrap()
            .then_with(|| x.codes().cmp(&y.codes()))
    });
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRisk {
    pub path_label: String,
    pub attack_id: String,
    pub attack_weight: f64,
    pub defense_gap: f64,
    pub crr: f64,
    pub cci: f64,
}

/// C(ℓ) = layer score/5, U = Π(1−C), CRR = clip(P·w·U), w = ω̃·δ; ranked
/// by CRR with the (path codes, attack id) tie rule, truncated to k.
pub fn oracle_top_cascades(
    paths: &[OraclePath],
    score: &OracleScore,
    catalog: &RawCatalog,
    k: usize,
) -> Vec<OracleRisk> {
    let coverage: Vec<f64> = score.layer_scores.iter().map(|s| s / 5.0).collect();
    let mut records = Vec::new();
    for path in paths {
        let (i, j, kk) = path.triple;
        let gap = (1.0 - coverage[i]) * (1.0 - coverage[j]) * (1.0 - coverage[kk]);
        for (a, id) in catalog.attack_ids.iter().enumerate() {
            let w = score.omega_adjusted[a] * catalog.delta[a];
            let crr = (path.strength * w * gap).min(1.0).max(0.0);
            records.push((path.clone(), id.clone(), w, gap, crr));
        }
    }
    records.sort_by(|x, y| {
        y.4.partial_cmp(&x.4)
            .unwrap()
            .then_with(|| x.0.codes().cmp(&y.0.codes()))
            .then_with(|| x.1.cmp(&y.1))
    });
    records.truncate(k);
    records
        .into_iter()
        .map(|(path, attack_id, w, gap, crr)| OracleRisk {
            path_label: path.label(),
            attack_id,
            attack_weight: w,
            defense_gap: gap,
            crr,
            cci: 1.0 - crr,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Monte Carlo oracle (same frozen RNG definition, reimplemented).
// ---------------------------------------------------------------------------

fn oracle_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn oracle_draw(seed: u64, iteration: u64, index: u64) -> f64 {
    let h = oracle_mix(oracle_mix(oracle_mix(seed) ^ (iteration + 1)) ^ (index + 1));
    ((h >> 11) as f64) * (2.0 / 9_007_199_254_740_992.0) - 1.0
}

fn oracle_perturb(value: f64, fraction: f64, u: f64) -> f64 {
    let v = value * (1.0 + fraction * u);
    v.min(1.0).max(0.0)
}

pub struct OracleSummary {
    pub mean: f64,
    pub std_dev: f64,
    pub median: f64,
    pub p5: f64,
    pub p95: f64,
    pub point_estimate: f64,
}

pub fn oracle_percentile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let frac = h - h.floor();
    if frac == 0.0 || lo + 1 >= sorted.len() {
        sorted[lo.min(sorted.len() - 1)]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

fn oracle_summarize(samples: &[f64], point: f64) -> OracleSummary {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let std_dev = (sorted.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt();
    OracleSummary {
        mean,
        std_dev,
        median: oracle_percentile(&sorted, 0.5),
        p5: oracle_percentile(&sorted, 0.05),
        p95: oracle_percentile(&sorted, 0.95),
        point_estimate: point,
    }
}

/// Full Monte Carlo loop with the default targets (λ, ι, γ, μ),
/// multiplicative ±fraction noise, and the frozen stream layout.
/// Returns metric name → summary, matching the engine's metric keys.
pub fn oracle_monte_carlo(
    catalog: &RawCatalog,
    assessment: &RawAssessment,
    coupling: Option<&RawCoupling>,
    iterations: u64,
    seed: u64,
    fraction: f64,
) -> BTreeMap<String, OracleSummary> {
    let a = catalog.attack_ids.len() as u64;
    let d = catalog.defense_ids.len() as u64;
    let idx_lambda = |i: usize| i as u64;
    let idx_iota = |i: usize| a + i as u64;
    let idx_gamma = |i: usize, j: usize| 2 * a + i as u64 * d + j as u64;
    let idx_mu = |j: usize| 2 * a + a * d + j as u64;

    let baseline = oracle_score(
        &assessment.lambda,
        &assessment.iota,
        &assessment.z,
        &catalog.gamma,
        &assessment.mu,
        &catalog.defense_layers,
    )
    .expect("baseline must be scorable");

    // Tracked cascade records come from the unperturbed run.
    let mut tracked: Vec<(OraclePath, usize, String, f64)> = Vec::new();
    if let Some(c) = coupling {
        let dm = oracle_coupling(c);
        let paths = oracle_paths(&dm, 0.3, 0.1, true);
        for record in oracle_top_cascades(&paths, &baseline, catalog, 3) {
            let attack = catalog
                .attack_ids
                .iter()
                .position(|id| *id == record.attack_id)
                .unwrap();
            let path = paths
                .iter()
                .find(|p| p.label() == record.path_label)
                .unwrap()
                .clone();
            let metric = format!("cascade_crr.{}.{}", record.path_label, record.attack_id);
            tracked.push((path, attack, metric, record.crr));
        }
    }

    let mut names: Vec<(String, f64)> =
        vec![("aggregate_percent".into(), baseline.aggregate_percent)];
    for (ell, code) in LAYER_CODES.iter().enumerate() {
        names.push((format!("layer_score.{code}"), baseline.layer_scores[ell]));
    }
    for (_, _, metric, point) in &tracked {
        names.push((metric.clone(), *point));
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(iterations as usize); names.len()];
    for t in 0..iterations {
        let mut lambda = assessment.lambda.clone();
        let mut iota = assessment.iota.clone();
        for i in 0..lambda.len() {
            lambda[i] = oracle_perturb(lambda[i], fraction, oracle_draw(seed, t, idx_lambda(i)));
            iota[i] = oracle_perturb(iota[i], fraction, oracle_draw(seed, t, idx_iota(i)));
        }
        let mut gamma = catalog.gamma.clone();
        for (i, row) in gamma.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = oracle_perturb(*cell, fraction, oracle_draw(seed, t, idx_gamma(i, j)));
            }
        }
        let mut mu = assessment.mu.clone();
        for (j, v) in mu.iter_mut().enumerate() {
            *v = oracle_perturb(*v, fraction, oracle_draw(seed, t, idx_mu(j)));
        }
        let score = oracle_score(
            &lambda,
            &iota,
            &assessment.z,
            &gamma,
            &mu,
            &catalog.defense_layers,
        )
        .expect("multiplicative noise preserves a nonzero severity mass");
        columns[0].push(score.aggregate_percent);
        for ell in 0..7 {
            columns[1 + ell].push(score.layer_scores[ell]);
        }
        let coverage: Vec<f64> = score.layer_scores.iter().map(|s| s / 5.0).collect();
        for (slot, (path, attack, _, _)) in tracked.iter().enumerate() {
            let (i, j, k) = path.triple;
            let gap = (1.0 - coverage[i]) * (1.0 - coverage[j]) * (1.0 - coverage[k]);
            let w = score.omega_adjusted[*attack] * catalog.delta[*attack];
            let crr = (path.strength * w * gap).min(1.0).max(0.0);
            columns[8 + slot].push(crr);
        }
    }

    names
        .into_iter()
        .zip(columns)
        .map(|((name, point), samples)| (name, oracle_summarize(&samples, point)))
        .collect()
}

/// Same loop with a different generator (ChaCha8), for the one check that
/// must not depend on the frozen RNG. Draws happen in a fixed input order.
pub fn oracle_mc_mean_other_rng(
    catalog: &RawCatalog,
    assessment: &RawAssessment,
    iterations: u64,
    seed: u64,
    fraction: f64,
) -> f64 {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    for _ in 0..iterations {
        let mut draw = || rng.random_range(-1.0..1.0);
        let lambda: Vec<f64> = assessment
            .lambda
            .iter()
            .map(|&v| oracle_perturb(v, fraction, draw()))
            .collect();
        let iota: Vec<f64> = assessment
            .iota
            .iter()
            .map(|&v| oracle_perturb(v, fraction, draw()))
            .collect();
        let gamma: Vec<Vec<f64>> = catalog
            .gamma
            .iter()
            .map(|row| row.iter().map(|&v| oracle_perturb(v, fraction, draw())).collect())
            .collect();
        let mu: Vec<f64> = assessment
            .mu
            .iter()
            .map(|&v| oracle_perturb(v, fraction, draw()))
            .collect();
        let score = oracle_score(
            &lambda,
            &iota,
            &assessment.z,
            &gamma,
            &mu,
            &catalog.defense_layers,
        )
        .expect("scorable");
        sum += score.aggregate_percent;
    }
    sum / iterations as f64
}

// ---------------------------------------------------------------------------
// Seeded random input generation for the sweeps.
// ---------------------------------------------------------------------------

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use riskmap_core::{
    AttackVector, Catalog, DefenseMechanism, LayerId, Matrix, PlatformAssessment,
};

pub struct RandomCase {
    pub catalog: Catalog,
    pub assessment: PlatformAssessment,
    /// Plain copies for the oracle.
    pub lambda: Vec<f64>,
    pub iota: Vec<f64>,
    pub z: Vec<f64>,
    pub mu: Vec<f64>,
    pub gamma_rows: Vec<Vec<f64>>,
    pub defense_layers: Vec<usize>,
}

/// Random catalog/assessment up to max_attacks×max_defenses with continuous
/// values, guaranteed to have nonzero severity mass.
pub fn random_case(rng: &mut ChaCha8Rng, max_attacks: usize, max_defenses: usize) -> RandomCase {
    let n = rng.random_range(1..=max_attacks);
    let d = rng.random_range(0..=max_defenses);

    let mut per_layer_attack = [0usize; 7];
    let mut attacks = Vec::with_capacity(n);
    let mut lambda = Vec::with_capacity(n);
    let mut iota = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    for i in 0..n {
        let ell = rng.random_range(0..7);
        per_layer_attack[ell] += 1;
        let layer = LayerId::from_ordinal(ell).unwrap();
        let mut l: f64 = rng.random_range(0.0..=1.0);
        let mut imp: f64 = rng.random_range(0.0..=1.0);
        let mut applicable = rng.random_bool(0.8);
        if i == 0 {
            // Keep the weighted denominator away from zero.
            l = l.max(0.5);
            imp = imp.max(0.5);
            applicable = true;
        }
        attacks.push(AttackVector {
            id: format!("{}-A{}", layer.code(), per_layer_attack[ell]),
            layer,
            name: format!("synthetic attack {i}"),
            likelihood: l,
            impact: imp,
            detectability: rng.random_range(0.1..=1.0),
            references: Vec::new(),
        });
        lambda.push(l);
        iota.push(imp);
        z.push(if applicable { 1.0 } else { 0.0 });
    }

    let mut per_layer_defense = [0usize; 7];
    let mut defenses = Vec::with_capacity(d);
    let mut defense_layers = Vec::with_capacity(d);
    let mut mu = Vec::with_capacity(d);
    for j in 0..d {
        let ell = rng.random_range(0..7);
        per_layer_defense[ell] += 1;
        let layer = LayerId::from_ordinal(ell).unwrap();
        defenses.push(DefenseMechanism {
            id: format!("{}-D{}", layer.code(), per_layer_defense[ell]),
            layer,
            name: format!("synthetic defense {j}"),
            references: Vec::new(),
        });
        defense_layers.push(ell);
        mu.push(rng.random_range(0.0..=1.0));
    }

    let gamma_rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(0.0..=1.0)).collect())
        .collect();
    let catalog = Catalog::new(
        "random",
        attacks,
        defenses,
        Matrix::from_rows(gamma_rows.clone()).unwrap(),
        true,
    )
    .unwrap();
    let assessment = PlatformAssessment {
        platform: "random".into(),
        applicability: catalog
            .attacks
            .iter()
            .zip(&z)
            .map(|(a, &zi)| (a.id.clone(), zi as u8))
            .collect(),
        implementation: catalog
            .defenses
            .iter()
            .zip(&mu)
            .map(|(df, &m)| (df.id.clone(), m))
            .collect(),
        overrides: BTreeMap::new(),
        notes: None,
    };
    RandomCase {
        catalog,
        assessment,
        lambda,
        iota,
        z,
        mu,
        gamma_rows,
        defense_layers,
    }
}

/// Random valid coupling inputs with α+β = 1.
pub fn random_coupling(rng: &mut ChaCha8Rng) -> riskmap_core::CouplingInputs {
    let alpha: f64 = rng.random_range(0.0..=1.0);
    let mut mat = |zero_bias: f64| {
        Matrix::from_rows(
            (0..7)
                .map(|_| {
                    (0..7)
                        .map(|_| {
                            if rng.random_bool(zero_bias) {
                                0.0
                            } else {
                                rng.random_range(0.0..=1.0)
                            }
                        })
                        .collect()
                })
                .collect(),
        )
        .unwrap()
    };
    riskmap_core::CouplingInputs {
        alpha,
        beta: 1.0 - alpha,
        structural: mat(0.2),
        empirical: mat(0.2),
        mitigations: mat(0.5),
        illustrative: false,
    }
}
