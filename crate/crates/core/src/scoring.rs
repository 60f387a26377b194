//! The scoring pipeline: severity, applicability masking, effective
//! coverage, combined coverage, the aggregate percentage, and per-layer
//! diagnostic scores.
//!
//! All operations are pure functions; evaluate them concurrently at will.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assessment::{bind, PlatformAssessment};
use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::layer::LayerId;
use crate::matrix::Matrix;

/// Everything the pipeline produces for one platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    /// Severity ω_i = λ_i·ι_i per attack, catalog order.
    pub omega: Vec<f64>,
    /// Applicability-masked severity ω̃_i = Z_i·ω_i.
    pub omega_adjusted: Vec<f64>,
    /// Effective coverage ε_ij = γ_ij·μ_j.
    pub epsilon: Matrix,
    /// Combined coverage κ_i per attack.
    pub kappa: Vec<f64>,
    /// Severity-weighted mean coverage, 0–100.
    pub aggregate_percent: f64,
    /// Per-layer diagnostic scores, 0–5.
    pub layer_scores: BTreeMap<LayerId, f64>,
}

fn check_unit(value: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::Domain(format!("{what} {value} outside [0, 1]")));
    }
    Ok(())
}

/// Severity ω = λ·ι.
pub fn severity(likelihood: f64, impact: f64) -> Result<f64> {
    check_unit(likelihood, "likelihood")?;
    check_unit(impact, "impact")?;
    Ok(likelihood * impact)
}

/// Zero the severity of inapplicable attacks: ω̃_i = Z_i·ω_i.
pub fn adjusted_severity(omega: &[f64], applicability: &[bool]) -> Result<Vec<f64>> {
    if omega.len() != applicability.len() {
        return Err(Error::LengthMismatch {
            what: "applicability vector",
            expected: omega.len(),
            actual: applicability.len(),
        });
    }
    Ok(omega
        .iter()
        .zip(applicability)
        .map(|(&w, &z)| if z { w } else { 0.0 })
        .collect())
}

/// Effective coverage ε_ij = γ_ij·μ_j.
pub fn effective_coverage(gamma: &Matrix, mu: &[f64]) -> Result<Matrix> {
    if gamma.cols() != mu.len() {
        return Err(Error::LengthMismatch {
            what: "implementation vector",
            expected: gamma.cols(),
            actual: mu.len(),
        });
    }
    let mut epsilon = gamma.clone();
    for i in 0..epsilon.rows() {
        for (j, &level) in mu.iter().enumerate() {
            epsilon.set(i, j, gamma.get(i, j) * level);
        }
    }
    Ok(epsilon)
}

/// κ = 1 − Π(1−ε) over the given entries. An entry of exactly 1 short-
/// circuits to κ = 1; the empty product gives κ = 0. Uses IEEE basic ops
/// only, so the result is weakly monotone in every entry and bit-identical
/// across platforms.
fn combined_coverage(entries: impl Iterator<Item = f64>) -> f64 {
    let mut product = 1.0;
    for e in entries {
        if e >= 1.0 {
            return 1.0;
        }
        product *= 1.0 - e;
    }
    1.0 - product
}

/// Combined coverage κ for one attack row of ε.
pub fn total_coverage(epsilon_row: &[f64]) -> Result<f64> {
    for &e in epsilon_row {
        check_unit(e, "effective coverage")?;
    }
    Ok(combined_coverage(epsilon_row.iter().copied()))
}

/// Severity-weighted mean of `values`. Errors when the weights sum to zero.
fn weighted_mean(weights: &[f64], values: &[f64]) -> Result<f64> {
    debug_assert_eq!(weights.len(), values.len());
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for (&w, &v) in weights.iter().zip(values) {
        numerator += w * v;
        denominator += w;
    }
    if denominator == 0.0 {
        return Err(Error::NoApplicableThreats);
    }
    Ok(numerator / denominator)
}

/// Aggregate score: severity-weighted mean coverage as a percentage.
/// The ×100 is evaluated as (mean·5)·20 so that the single-layer identity
/// LayerScore·20 == aggregate holds bit-exactly.
pub fn riskmap_score(omega_adjusted: &[f64], kappa: &[f64]) -> Result<f64> {
    if omega_adjusted.len() != kappa.len() {
        return Err(Error::LengthMismatch {
            what: "coverage vector",
            expected: omega_adjusted.len(),
            actual: kappa.len(),
        });
    }
    Ok(weighted_mean(omega_adjusted, kappa)? * 5.0 * 20.0)
}

/// Per-layer diagnostic scores on the 0–5 scale. For each layer, coverage is
/// recombined over that layer's resident defense columns only; a layer with
/// no defenses scores 0.
pub fn layer_scores(
    omega_adjusted: &[f64],
    epsilon: &Matrix,
    partition: &BTreeMap<LayerId, Vec<usize>>,
) -> Result<BTreeMap<LayerId, f64>> {
    if omega_adjusted.len() != epsilon.rows() {
        return Err(Error::LengthMismatch {
            what: "severity vector",
            expected: epsilon.rows(),
            actual: omega_adjusted.len(),
        });
    }
    let mut seen = vec![false; epsilon.cols()];
    for columns in partition.values() {
        for &j in columns {
            if j >= epsilon.cols() || seen[j] {
                return Err(Error::Domain(format!(
                    "defense partition does not cover the {} columns exactly once",
                    epsilon.cols()
                )));
            }
            seen[j] = true;
        }
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::Domain(format!(
            "defense partition does not cover the {} columns exactly once",
            epsilon.cols()
        )));
    }

    let empty = Vec::new();
    let mut scores = BTreeMap::new();
    for layer in LayerId::ALL {
        let columns = partition.get(&layer).unwrap_or(&empty);
        let restricted: Vec<f64> = (0..epsilon.rows())
            .map(|i| combined_coverage(columns.iter().map(|&j| epsilon.get(i, j))))
            .collect();
        scores.insert(layer, weighted_mean(omega_adjusted, &restricted)? * 5.0);
    }
    Ok(scores)
}

/// Lower-level pipeline entry over already-bound vectors. Monte Carlo runs
/// call this directly with perturbed copies.
pub fn compute_breakdown(
    likelihood: &[f64],
    impact: &[f64],
    applicability: &[bool],
    gamma: &Matrix,
    mu: &[f64],
    partition: &BTreeMap<LayerId, Vec<usize>>,
) -> Result<ScoreBreakdown> {
    let omega = likelihood
        .iter()
        .zip(impact)
        .map(|(&l, &i)| severity(l, i))
        .collect::<Result<Vec<f64>>>()?;
    let omega_adjusted = adjusted_severity(&omega, applicability)?;
    let epsilon = effective_coverage(gamma, mu)?;
    let kappa = (0..epsilon.rows())
        .map(|i| total_coverage(epsilon.row(i)))
        .collect::<Result<Vec<f64>>>()?;
    let aggregate_percent = riskmap_score(&omega_adjusted, &kappa)?;
    let layer_scores = layer_scores(&omega_adjusted, &epsilon, partition)?;
    Ok(ScoreBreakdown {
        omega,
        omega_adjusted,
        epsilon,
        kappa,
        aggregate_percent,
        layer_scores,
    })
}

/// Full pipeline: bind the assessment, apply overrides, then run
/// severity → masking → effective coverage → combined coverage → scores.
pub fn score_platform(catalog: &Catalog, assessment: &PlatformAssessment) -> Result<ScoreBreakdown> {
    let bound = bind(catalog, assessment)?;
    compute_breakdown(
        &bound.likelihood,
        &bound.impact,
        &bound.applicability,
        &catalog.gamma,
        &bound.mu,
        &catalog.defense_columns(),
    )
}
