//! Cross-layer cascade analysis: the inter-layer coupling matrix, threshold-
//! gated two-hop path enumeration, defense gaps, and residual-risk ranking.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::catalog::{Catalog, ValidationReport, ViolationCode};
use crate::error::{Error, Result};
use crate::layer::{LayerId, LAYER_COUNT};
use crate::matrix::Matrix;
use crate::scoring::ScoreBreakdown;

pub const DEFAULT_ALPHA: f64 = 0.6;
pub const DEFAULT_BETA: f64 = 0.4;
pub const DEFAULT_EPSILON_HOP: f64 = 0.3;
pub const DEFAULT_MIN_PROP: f64 = 0.1;
pub const DEFAULT_TOP_K: usize = 3;

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_beta() -> f64 {
    DEFAULT_BETA
}

/// Inputs for the coupling matrix: structural spread feasibility S,
/// empirical spread evidence E, and edge mitigations M, all 7×7 and indexed
/// by layer ordinal, blended as (αS + βE)∘(1−M).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingInputs {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(rename = "S")]
    pub structural: Matrix,
    #[serde(rename = "E")]
    pub empirical: Matrix,
    #[serde(rename = "M")]
    pub mitigations: Matrix,
    /// True when the matrices are authored placeholders, not measurements.
    #[serde(default)]
    pub illustrative: bool,
}

impl CouplingInputs {
    pub fn parse(bytes: &[u8]) -> Result<CouplingInputs> {
        Ok(serde_json::from_slice(bytes)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<CouplingInputs> {
        let bytes = std::fs::read(path)?;
        let inputs = Self::parse(&bytes)?;
        validate_coupling(&inputs).into_result()?;
        Ok(inputs)
    }

    pub fn emit(&self) -> Result<Vec<u8>> {
        canonical::canonical_bytes(self)
    }

    pub fn fingerprint(&self) -> Result<String> {
        canonical::fingerprint(self)
    }
}

/// Lint the coupling inputs: α+β = 1 (within 1e−9), matrices 7×7 in [0,1].
pub fn validate_coupling(inputs: &CouplingInputs) -> ValidationReport {
    let mut report = ValidationReport::default();
    if inputs.alpha < 0.0 || inputs.beta < 0.0 {
        report.push(
            ViolationCode::WeightSum,
            "alpha",
            format!("alpha {} and beta {} must be non-negative", inputs.alpha, inputs.beta),
        );
    }
    if ((inputs.alpha + inputs.beta) - 1.0).abs() > 1e-9 {
        report.push(
            ViolationCode::WeightSum,
            "alpha",
            format!("alpha + beta = {} but must equal 1", inputs.alpha + inputs.beta),
        );
    }
    for (name, m) in [
        ("S", &inputs.structural),
        ("E", &inputs.empirical),
        ("M", &inputs.mitigations),
    ] {
        if m.rows() != LAYER_COUNT || m.cols() != LAYER_COUNT {
            report.push(
                ViolationCode::DimMismatch,
                name,
                format!("{name} is {}x{}, expected 7x7", m.rows(), m.cols()),
            );
            continue;
        }
        for i in 0..LAYER_COUNT {
            for j in 0..LAYER_COUNT {
                let v = m.get(i, j);
                if !(0.0..=1.0).contains(&v) {
                    report.push(
                        ViolationCode::EntryRange,
                        format!("{name}[{i}][{j}]"),
                        format!("entry {v} outside [0, 1]"),
                    );
                }
            }
        }
    }
    report
}

/// How per-layer coverage C(ℓ) is derived from a score breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerCoverageMode {
    /// C(ℓ) = LayerScore_ℓ / 5: how much layer ℓ's resident defenses cover
    /// the whole threat landscape.
    #[default]
    LayerScoreScaled,
    /// C(ℓ) = severity-weighted mean of κ over attacks resident in ℓ
    /// (all defenses contribute); 0 when the layer has no applicable attacks.
    ResidentAttacks,
}

/// Knobs for path enumeration and ranking. Only two-hop paths are
/// implemented; other `hops` values are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    pub epsilon_hop: f64,
    pub min_prop: f64,
    pub hops: u32,
    pub top_k: usize,
    pub require_distinct_endpoints: bool,
    pub layer_coverage_mode: LayerCoverageMode,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig {
            epsilon_hop: DEFAULT_EPSILON_HOP,
            min_prop: DEFAULT_MIN_PROP,
            hops: 2,
            top_k: DEFAULT_TOP_K,
            require_distinct_endpoints: true,
            layer_coverage_mode: LayerCoverageMode::default(),
        }
    }
}

impl CascadeConfig {
    fn validate(&self) -> Result<()> {
        if self.hops != 2 {
            return Err(Error::UnsupportedConfig(format!(
                "only 2-hop paths are implemented, got hops = {}",
                self.hops
            )));
        }
        for (name, v) in [("epsilon_hop", self.epsilon_hop), ("min_prop", self.min_prop)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// One qualifying two-hop corridor ℓ_i → ℓ_j → ℓ_k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadePath {
    pub layers: [LayerId; 3],
    pub hop_strengths: [f64; 2],
    pub strength: f64,
}

impl CascadePath {
    pub fn codes(&self) -> [&'static str; 3] {
        [self.layers[0].code(), self.layers[1].code(), self.layers[2].code()]
    }

    /// "P->SP->DP" style label used in reports and CSV.
    pub fn label(&self) -> String {
        self.codes().join("->")
    }
}

/// Residual risk of one (path, attack) pair and its containment complement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeRisk {
    pub path: CascadePath,
    pub attack_id: String,
    pub attack_weight: f64,
    pub defense_gap: f64,
    pub crr: f64,
    pub cci: f64,
}

/// Per-layer coverage used by the defense-gap computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCoverageVector {
    pub coverage: BTreeMap<LayerId, f64>,
}

impl LayerCoverageVector {
    pub fn get(&self, layer: LayerId) -> f64 {
        self.coverage.get(&layer).copied().unwrap_or(0.0)
    }
}

/// D = (αS + βE)∘(1−M) off the diagonal; D_ii = 1 (self-coupling, never
/// used as a hop). Entries are clipped to [0,1] after the α+β tolerance.
pub fn coupling_matrix(inputs: &CouplingInputs) -> Result<Matrix> {
    let report = validate_coupling(inputs);
    if !report.is_valid() {
        return Err(Error::Domain(format!("invalid coupling inputs: {report}")));
    }
    let mut d = Matrix::zeros(LAYER_COUNT, LAYER_COUNT);
    for i in 0..LAYER_COUNT {
        for j in 0..LAYER_COUNT {
            if i == j {
                d.set(i, j, 1.0);
            } else {
                let blended = inputs.alpha * inputs.structural.get(i, j)
                    + inputs.beta * inputs.empirical.get(i, j);
                let damped = blended * (1.0 - inputs.mitigations.get(i, j));
                d.set(i, j, damped.clamp(0.0, 1.0));
            }
        }
    }
    Ok(d)
}

/// Every ordered triple ℓ_i→ℓ_j→ℓ_k with distinct consecutive layers
/// (distinct endpoints unless configured otherwise), both hops ≥ ε_hop and
/// strength ≥ min_prop. Sorted by strength descending, ties by the
/// lexicographic layer-code triple. Diagonal entries never count as hops.
pub fn enumerate_two_hop_paths(d: &Matrix, cfg: &CascadeConfig) -> Result<Vec<CascadePath>> {
    cfg.validate()?;
    if d.rows() != LAYER_COUNT || d.cols() != LAYER_COUNT {
        return Err(Error::LengthMismatch {
            what: "coupling matrix",
            expected: LAYER_COUNT,
            actual: d.rows(),
        });
    }
    let mut paths = Vec::new();
    for i in 0..LAYER_COUNT {
        for j in 0..LAYER_COUNT {
            if i == j {
                continue;
            }
            for k in 0..LAYER_COUNT {
                if j == k || (cfg.require_distinct_endpoints && i == k) {
                    continue;
                }
                let hop_a = d.get(i, j);
                let hop_b = d.get(j, k);
                if hop_a < cfg.epsilon_hop || hop_b < cfg.epsilon_hop {
                    continue;
                }
                let strength = hop_a * hop_b;
                if strength < cfg.min_prop {
                    continue;
                }
                paths.push(CascadePath {
                    layers: [
                        LayerId::from_ordinal(i).expect("index in range"),
                        LayerId::from_ordinal(j).expect("index in range"),
                        LayerId::from_ordinal(k).expect("index in range"),
                    ],
                    hop_strengths: [hop_a, hop_b],
                    strength,
                });
            }
        }
    }
    paths.sort_by(|a, b| {
        b.strength
            .partial_cmp(&a.strength)
            .expect("strengths are finite")
            .then_with(|| a.codes().cmp(&b.codes()))
    });
    Ok(paths)
}

/// Default C(ℓ): LayerScore_ℓ rescaled from 0–5 to 0–1.
pub fn layer_coverage(breakdown: &ScoreBreakdown) -> LayerCoverageVector {
    LayerCoverageVector {
        coverage: breakdown
            .layer_scores
            .iter()
            .map(|(&layer, &score)| (layer, score / 5.0))
            .collect(),
    }
}

/// Alternative C(ℓ): severity-weighted κ over attacks resident in ℓ.
pub fn layer_coverage_resident(catalog: &Catalog, breakdown: &ScoreBreakdown) -> LayerCoverageVector {
    let rows = catalog.attack_rows();
    let mut coverage = BTreeMap::new();
    for layer in LayerId::ALL {
        let mut numerator = 0.0;
        let mut denominator = 0.0;
        for &i in &rows[&layer] {
            numerator += breakdown.omega_adjusted[i] * breakdown.kappa[i];
            denominator += breakdown.omega_adjusted[i];
        }
        let c = if denominator == 0.0 { 0.0 } else { numerator / denominator };
        coverage.insert(layer, c);
    }
    LayerCoverageVector { coverage }
}

/// Multiplicative defense gap U = Π(1 − C(ℓ)) over the path's three layers.
pub fn defense_gap(coverage: &LayerCoverageVector, path: &CascadePath) -> f64 {
    path.layers
        .iter()
        .map(|&l| 1.0 - coverage.get(l))
        .product()
}

pub fn clip_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// CRR = clip(P·w·U) and its complement CCI = 1 − CRR.
pub fn cascade_residual_risk(
    path: &CascadePath,
    attack_id: &str,
    attack_weight: f64,
    gap: f64,
) -> CascadeRisk {
    let crr = clip_unit(path.strength * attack_weight * gap);
    CascadeRisk {
        path: path.clone(),
        attack_id: attack_id.to_string(),
        attack_weight,
        defense_gap: gap,
        crr,
        cci: 1.0 - crr,
    }
}

/// The k highest-CRR records; ties broken by (layer triple, attack id).
pub fn top_k_cascades(mut risks: Vec<CascadeRisk>, k: usize) -> Vec<CascadeRisk> {
    risks.sort_by(|a, b| {
        b.crr
            .partial_cmp(&a.crr)
            .expect("risks are finite")
            .then_with(|| a.path.codes().cmp(&b.path.codes()))
            .then_with(|| a.attack_id.cmp(&b.attack_id))
    });
    risks.truncate(k);
    risks
}

/// Full cascade analysis for one scored platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeAnalysis {
    pub catalog_fingerprint: String,
    pub coupling: Matrix,
    pub paths: Vec<CascadePath>,
    pub layer_coverage: LayerCoverageVector,
    /// Top-k (path, attack) records by CRR.
    pub top: Vec<CascadeRisk>,
    /// How many (path, attack) records were ranked.
    pub records: usize,
}

/// Build the coupling matrix, enumerate paths, score every (path, attack)
/// pair with w_a = ω̃_a·δ_a, and keep the top-k.
pub fn analyze_cascades(
    catalog: &Catalog,
    breakdown: &ScoreBreakdown,
    inputs: &CouplingInputs,
    cfg: &CascadeConfig,
) -> Result<CascadeAnalysis> {
    if breakdown.omega_adjusted.len() != catalog.attacks.len() {
        return Err(Error::LengthMismatch {
            what: "breakdown",
            expected: catalog.attacks.len(),
            actual: breakdown.omega_adjusted.len(),
        });
    }
    let coupling = coupling_matrix(inputs)?;
    let paths = enumerate_two_hop_paths(&coupling, cfg)?;
    let coverage = match cfg.layer_coverage_mode {
        LayerCoverageMode::LayerScoreScaled => layer_coverage(breakdown),
        LayerCoverageMode::ResidentAttacks => layer_coverage_resident(catalog, breakdown),
    };
    let mut risks = Vec::with_capacity(paths.len() * catalog.attacks.len());
    for path in &paths {
        let gap = defense_gap(&coverage, path);
        for (i, attack) in catalog.attacks.iter().enumerate() {
            let weight = breakdown.omega_adjusted[i] * attack.detectability;
            risks.push(cascade_residual_risk(path, &attack.id, weight, gap));
        }
    }
    let records = risks.len();
    Ok(CascadeAnalysis {
        catalog_fingerprint: catalog.fingerprint.clone(),
        coupling,
        paths,
        layer_coverage: coverage,
        top: top_k_cascades(risks, cfg.top_k),
        records,
    })
}
