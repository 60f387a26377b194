//! Monte Carlo uncertainty quantification with deterministic, order-
//! independent streams.
//!
//! Every random draw is a pure function of (seed, iteration, input index),
//! so summaries are bit-identical regardless of evaluation order or thread
//! count. The generator is a frozen implementation constant, echoed in the
//! report config as [`RNG_ID`].

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::assessment::{bind, PlatformAssessment};
use crate::cascade::{analyze_cascades, clip_unit, defense_gap, layer_coverage,
    layer_coverage_resident, CascadeConfig, CascadePath, CouplingInputs, LayerCoverageMode};
use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::layer::LayerId;
use crate::scoring::compute_breakdown;

/// Seed used when the caller provides none, so even "unseeded" runs are
/// reproducible.
pub const DEFAULT_SEED: u64 = 0x5249534B4D415030;

/// Identifier of the frozen counter-based generator.
pub const RNG_ID: &str = "splitmix64-chain/v1";

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in [−1, 1), keyed by (seed, iteration, input index).
pub fn unit_draw(seed: u64, iteration: u64, index: u64) -> f64 {
    let h = mix64(mix64(mix64(seed) ^ iteration.wrapping_add(1)) ^ index.wrapping_add(1));
    ((h >> 11) as f64) * (2.0 / 9_007_199_254_740_992.0) - 1.0
}

/// Which inputs receive noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseTarget {
    Likelihood,
    Impact,
    Gamma,
    Mu,
    AttackWeight,
}

/// Multiplicative noise scales the value by (1 + f·u); additive shifts it by
/// f·u. Both clip to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    #[default]
    Multiplicative,
    Additive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub fraction: f64,
    pub targets: BTreeSet<NoiseTarget>,
    pub model: NoiseModel,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            fraction: 0.25,
            targets: [
                NoiseTarget::Likelihood,
                NoiseTarget::Impact,
                NoiseTarget::Gamma,
                NoiseTarget::Mu,
            ]
            .into(),
            model: NoiseModel::Multiplicative,
        }
    }
}

impl NoiseSpec {
    /// The alternative target set: γ, μ and the cascade attack weights.
    pub fn cascade_targets() -> BTreeSet<NoiseTarget> {
        [NoiseTarget::Gamma, NoiseTarget::Mu, NoiseTarget::AttackWeight].into()
    }

    fn validate(&self) -> Result<()> {
        if !(self.fraction >= 0.0 && self.fraction < 1.0) {
            return Err(Error::Domain(format!(
                "noise fraction {} outside [0, 1)",
                self.fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub iterations: u32,
    pub seed: u64,
    pub noise: NoiseSpec,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            iterations: 1000,
            seed: DEFAULT_SEED,
            noise: NoiseSpec::default(),
        }
    }
}

/// Perturbed value: clip_{[0,1]}(value·(1 + fraction·u)).
pub fn perturb(value: f64, fraction: f64, u: f64) -> f64 {
    clip_unit(value * (1.0 + fraction * u))
}

fn apply_noise(model: NoiseModel, value: f64, fraction: f64, u: f64) -> f64 {
    match model {
        NoiseModel::Multiplicative => perturb(value, fraction, u),
        NoiseModel::Additive => clip_unit(value + fraction * u),
    }
}

/// Linear-interpolation percentile over an ascending sample.
pub fn percentile(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("percentile rank {q} outside [0, 1]")));
    }
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let frac = h - h.floor();
    if frac == 0.0 || lo + 1 >= sorted.len() {
        return Ok(sorted[lo.min(sorted.len() - 1)]);
    }
    Ok(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]))
}

/// Distribution of one metric across iterations, plus its noise-free value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub mean: f64,
    /// Population standard deviation.
    pub std_dev: f64,
    pub median: f64,
    pub p5: f64,
    pub p95: f64,
    pub iterations: u32,
    pub point_estimate: f64,
}

fn summarize(samples: &[f64], point_estimate: f64) -> Result<DistributionSummary> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = samples.len() as f64;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    // A constant sample has that constant as its mean, exactly.
    let mean = if min == max {
        min
    } else {
        sorted.iter().sum::<f64>() / n
    };
    let std_dev = if min == max {
        0.0
    } else {
        (sorted.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt()
    };
    Ok(DistributionSummary {
        mean,
        std_dev,
        median: percentile(&sorted, 0.5)?,
        p5: percentile(&sorted, 0.05)?,
        p95: percentile(&sorted, 0.95)?,
        iterations: samples.len() as u32,
        point_estimate,
    })
}

/// Monte Carlo results: metric name → distribution summary. Metric keys are
/// "aggregate_percent", "layer_score.<CODE>", and (with coupling inputs)
/// "cascade_crr.<L1>-><L2>-><L3>.<attack-id>" for each baseline top path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResults {
    pub catalog_fingerprint: String,
    pub summaries: BTreeMap<String, DistributionSummary>,
}

/// Input-index layout for the perturbation streams (frozen):
/// λ_i = i, ι_i = A+i, γ_ij = 2A + i·D + j, μ_j = 2A + A·D + j,
/// w_i = 2A + A·D + D + i for A attacks and D defenses.
struct StreamLayout {
    attacks: u64,
    defenses: u64,
}

impl StreamLayout {
    fn lambda(&self, i: usize) -> u64 {
        i as u64
    }
    fn iota(&self, i: usize) -> u64 {
        self.attacks + i as u64
    }
    fn gamma(&self, i: usize, j: usize) -> u64 {
        2 * self.attacks + i as u64 * self.defenses + j as u64
    }
    fn mu(&self, j: usize) -> u64 {
        2 * self.attacks + self.attacks * self.defenses + j as u64
    }
    fn weight(&self, i: usize) -> u64 {
        2 * self.attacks + self.attacks * self.defenses + self.defenses + i as u64
    }
}

/// One tracked cascade record: the path is fixed by the unperturbed
/// coupling matrix; only coverage and the attack weight move per iteration.
struct TrackedCascade {
    path: CascadePath,
    attack_index: usize,
    metric: String,
    baseline_crr: f64,
}

/// Serial Monte Carlo run. See [`run_monte_carlo_threaded`] for the
/// order-independent parallel form; both produce identical results.
pub fn run_monte_carlo(
    catalog: &Catalog,
    assessment: &PlatformAssessment,
    coupling: Option<&CouplingInputs>,
    cascade_cfg: &CascadeConfig,
    cfg: &McConfig,
) -> Result<McResults> {
    run_monte_carlo_threaded(catalog, assessment, coupling, cascade_cfg, cfg, 1)
}

pub fn run_monte_carlo_threaded(
    catalog: &Catalog,
    assessment: &PlatformAssessment,
    coupling: Option<&CouplingInputs>,
    cascade_cfg: &CascadeConfig,
    cfg: &McConfig,
    threads: usize,
) -> Result<McResults> {
    cfg.noise.validate()?;
    if cfg.iterations == 0 {
        return Err(Error::Domain("iterations must be at least 1".into()));
    }
    let threads = threads.max(1);

    let bound = bind(catalog, assessment)?;
    let partition = catalog.defense_columns();
    let baseline = compute_breakdown(
        &bound.likelihood,
        &bound.impact,
        &bound.applicability,
        &catalog.gamma,
        &bound.mu,
        &partition,
    )?;

    // Metric names and point estimates, in a fixed order.
    let mut metrics: Vec<(String, f64)> =
        vec![("aggregate_percent".to_string(), baseline.aggregate_percent)];
    for layer in LayerId::ALL {
        metrics.push((
            format!("layer_score.{}", layer.code()),
            baseline.layer_scores[&layer],
        ));
    }
    let mut tracked: Vec<TrackedCascade> = Vec::new();
    if let Some(inputs) = coupling {
        let analysis = analyze_cascades(catalog, &baseline, inputs, cascade_cfg)?;
        for record in &analysis.top {
            let attack_index = catalog
                .attack_index(&record.attack_id)
                .expect("top record references a catalog attack");
            let metric = format!("cascade_crr.{}.{}", record.path.label(), record.attack_id);
            tracked.push(TrackedCascade {
                path: record.path.clone(),
                attack_index,
                metric: metric.clone(),
                baseline_crr: record.crr,
            });
            metrics.push((metric, record.crr));
        }
    }

    let layout = StreamLayout {
        attacks: catalog.attacks.len() as u64,
        defenses: catalog.defenses.len() as u64,
    };
    let iterations = cfg.iterations as usize;
    let spec = &cfg.noise;

    let one_iteration = |t: usize| -> Result<Vec<f64>> {
        let it = t as u64;
        let draw = |index: u64| unit_draw(cfg.seed, it, index);
        let noisy = |value: f64, index: u64| apply_noise(spec.model, value, spec.fraction, draw(index));

        let mut lambda = bound.likelihood.clone();
        if spec.targets.contains(&NoiseTarget::Likelihood) {
            for (i, v) in lambda.iter_mut().enumerate() {
                *v = noisy(*v, layout.lambda(i));
            }
        }
        let mut iota = bound.impact.clone();
        if spec.targets.contains(&NoiseTarget::Impact) {
            for (i, v) in iota.iter_mut().enumerate() {
                *v = noisy(*v, layout.iota(i));
            }
        }
        let mut gamma = catalog.gamma.clone();
        if spec.targets.contains(&NoiseTarget::Gamma) {
            for i in 0..gamma.rows() {
                for j in 0..gamma.cols() {
                    gamma.set(i, j, noisy(gamma.get(i, j), layout.gamma(i, j)));
                }
            }
        }
        let mut mu = bound.mu.clone();
        if spec.targets.contains(&NoiseTarget::Mu) {
            for (j, v) in mu.iter_mut().enumerate() {
                *v = noisy(*v, layout.mu(j));
            }
        }

        let breakdown = compute_breakdown(
            &lambda,
            &iota,
            &bound.applicability,
            &gamma,
            &mu,
            &partition,
        )?;

        let mut row = Vec::with_capacity(metrics.len());
        row.push(breakdown.aggregate_percent);
        for layer in LayerId::ALL {
            row.push(breakdown.layer_scores[&layer]);
        }
        if !tracked.is_empty() {
            let coverage = match cascade_cfg.layer_coverage_mode {
                LayerCoverageMode::LayerScoreScaled => layer_coverage(&breakdown),
                LayerCoverageMode::ResidentAttacks => layer_coverage_resident(catalog, &breakdown),
            };
            for record in &tracked {
                let i = record.attack_index;
                let mut weight =
                    breakdown.omega_adjusted[i] * catalog.attacks[i].detectability;
                if spec.targets.contains(&NoiseTarget::AttackWeight) {
                    weight = noisy(weight, layout.weight(i));
                }
                let gap = defense_gap(&coverage, &record.path);
                row.push(clip_unit(record.path.strength * weight * gap));
            }
        }
        Ok(row)
    };

    // Iteration-indexed collection: each row lands at its own index, so the
    // aggregation is identical for any thread count.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(iterations);
    if threads == 1 {
        for t in 0..iterations {
            rows.push(one_iteration(t)?);
        }
    } else {
        let chunk = iterations.div_ceil(threads);
        let results: Vec<Result<Vec<Vec<f64>>>> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for start in (0..iterations).step_by(chunk.max(1)) {
                let end = (start + chunk).min(iterations);
                let one_iteration = &one_iteration;
                handles.push(scope.spawn(move || (start..end).map(one_iteration).collect()));
            }
            handles
                .into_iter()
                .map(|h| h.join().expect("monte carlo worker panicked"))
                .collect()
        });
        for batch in results {
            rows.extend(batch?);
        }
    }

    let mut summaries = BTreeMap::new();
    for (m, (name, point)) in metrics.iter().enumerate() {
        let samples: Vec<f64> = rows.iter().map(|row| row[m]).collect();
        summaries.insert(name.clone(), summarize(&samples, *point)?);
    }
    // Quiet use so the struct field is honest: baselines are the point estimates.
    debug_assert!(tracked.iter().all(|r| {
        summaries[&r.metric].point_estimate == r.baseline_crr
    }));

    Ok(McResults {
        catalog_fingerprint: catalog.fingerprint.clone(),
        summaries,
    })
}
