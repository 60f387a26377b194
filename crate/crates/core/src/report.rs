//! Report assembly, canonical JSON/CSV emission, and what-if analysis.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assessment::PlatformAssessment;
use crate::canonical;
use crate::cascade::{CascadeAnalysis, CascadeConfig, CascadePath, CascadeRisk,
    LayerCoverageMode};
use crate::catalog::{is_capability_level, Catalog, CAPABILITY_LEVELS};
use crate::error::{Error, Result};
use crate::layer::LayerId;
use crate::matrix::Matrix;
use crate::scoring::{score_platform, ScoreBreakdown};
use crate::uncertainty::{DistributionSummary, McConfig, McResults, NoiseModel, NoiseTarget,
    RNG_ID};

/// Every knob that shaped a run, with defaults materialized. Together with
/// the catalog fingerprint and the assessment this is enough to reproduce a
/// report bit-identically (modulo `generated_at`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub allow_continuous: bool,
    pub alpha: f64,
    pub beta: f64,
    pub cumulative: bool,
    pub epsilon_hop: f64,
    pub hops: u32,
    pub iterations: u32,
    pub layer_coverage_mode: LayerCoverageMode,
    pub min_prop: f64,
    pub noise_fraction: f64,
    pub noise_model: NoiseModel,
    pub noise_targets: Vec<NoiseTarget>,
    pub require_distinct_endpoints: bool,
    pub rng: String,
    pub seed: u64,
    pub top_k: usize,
}

impl ConfigEcho {
    pub fn materialize(
        allow_continuous: bool,
        cumulative: bool,
        alpha: f64,
        beta: f64,
        cascade: &CascadeConfig,
        mc: &McConfig,
    ) -> ConfigEcho {
        ConfigEcho {
            allow_continuous,
            alpha,
            beta,
            cumulative,
            epsilon_hop: cascade.epsilon_hop,
            hops: cascade.hops,
            iterations: mc.iterations,
            layer_coverage_mode: cascade.layer_coverage_mode,
            min_prop: cascade.min_prop,
            noise_fraction: mc.noise.fraction,
            noise_model: mc.noise.model,
            noise_targets: mc.noise.targets.iter().copied().collect(),
            require_distinct_endpoints: cascade.require_distinct_endpoints,
            rng: RNG_ID.to_string(),
            seed: mc.seed,
            top_k: cascade.top_k,
        }
    }
}

impl Default for ConfigEcho {
    fn default() -> Self {
        ConfigEcho::materialize(
            false,
            false,
            crate::cascade::DEFAULT_ALPHA,
            crate::cascade::DEFAULT_BETA,
            &CascadeConfig::default(),
            &McConfig::default(),
        )
    }
}

/// Cascade results carried by a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeSection {
    pub coupling: Matrix,
    pub paths: Vec<CascadePath>,
    pub top: Vec<CascadeRisk>,
    pub records: usize,
}

/// The serializable bundle of everything one run produced. Optional
/// sections are explicit: `null` means absent, never missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentReport {
    pub platform: String,
    pub catalog_fingerprint: String,
    pub attack_ids: Vec<String>,
    pub defense_ids: Vec<String>,
    pub config: ConfigEcho,
    pub breakdown: ScoreBreakdown,
    pub mc: Option<BTreeMap<String, DistributionSummary>>,
    pub cascades: Option<CascadeSection>,
    pub generated_at: String,
    pub tool_version: String,
}

impl AssessmentReport {
    pub fn parse(bytes: &[u8]) -> Result<AssessmentReport> {
        Ok(serde_json::from_slice(bytes)?)
    }

    pub fn fingerprint(&self) -> Result<String> {
        canonical::fingerprint(self)
    }

    /// Canonical bytes with `generated_at` zeroed; what determinism tests
    /// and run-to-run comparisons look at.
    pub fn canonical_without_timestamp(&self) -> Result<Vec<u8>> {
        let mut copy = self.clone();
        copy.generated_at = String::new();
        canonical::canonical_bytes(&copy)
    }
}

/// Civil UTC timestamp (seconds precision) from the system clock.
fn now_utc_iso() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format_utc(secs)
}

/// Days-to-civil conversion (Gregorian, proleptic).
fn format_utc(unix_secs: u64) -> String {
    let days = unix_secs / 86_400;
    let rem = unix_secs % 86_400;
    let (h, m, s) = (rem / 3600, (rem % 3600) / 60, rem % 60);
    let mut z = days as i64 + 719_468;
    let era = z.div_euclid(146_097);
    z = z.rem_euclid(146_097);
    let yoe = (z - z / 1460 + z / 36_524 - z / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = z - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let mo = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = if mo <= 2 { y + 1 } else { y };
    format!("{y:04}-{mo:02}-{d:02}T{h:02}:{m:02}:{s:02}Z")
}

/// Assemble a report. Sections computed under a different catalog
/// fingerprint are rejected.
pub fn build_report(
    platform: impl Into<String>,
    catalog: &Catalog,
    breakdown: ScoreBreakdown,
    mc: Option<McResults>,
    cascades: Option<CascadeAnalysis>,
    config: ConfigEcho,
) -> Result<AssessmentReport> {
    if breakdown.omega.len() != catalog.attacks.len() {
        return Err(Error::Schema(format!(
            "breakdown covers {} attacks but the catalog has {}",
            breakdown.omega.len(),
            catalog.attacks.len()
        )));
    }
    let mc = match mc {
        Some(results) => {
            if results.catalog_fingerprint != catalog.fingerprint {
                return Err(Error::Schema(
                    "monte carlo section was computed under a different catalog".into(),
                ));
            }
            Some(results.summaries)
        }
        None => None,
    };
    let cascades = match cascades {
        Some(analysis) => {
            if analysis.catalog_fingerprint != catalog.fingerprint {
                return Err(Error::Schema(
                    "cascade section was computed under a different catalog".into(),
                ));
            }
            Some(CascadeSection {
                coupling: analysis.coupling,
                paths: analysis.paths,
                top: analysis.top,
                records: analysis.records,
            })
        }
        None => None,
    };
    Ok(AssessmentReport {
        platform: platform.into(),
        catalog_fingerprint: catalog.fingerprint.clone(),
        attack_ids: catalog.attacks.iter().map(|a| a.id.clone()).collect(),
        defense_ids: catalog.defenses.iter().map(|d| d.id.clone()).collect(),
        config,
        breakdown,
        mc,
        cascades,
        generated_at: now_utc_iso(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

/// Canonical JSON bytes of the report; two emissions of the same report are
/// identical.
pub fn emit_json(report: &AssessmentReport) -> Result<Vec<u8>> {
    canonical::canonical_bytes(report)
}

pub const SCORES_CSV_HEADER: &str = "attack_id,omega,omega_adjusted,kappa";
pub const LAYERS_CSV_HEADER: &str = "layer,layer_score";
pub const CASCADES_CSV_HEADER: &str = "path,attack_id,strength,defense_gap,crr,cci";
pub const MC_CSV_HEADER: &str = "metric,mean,std_dev,median,p5,p95";

fn fmt(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        x.to_string()
    }
}

/// The four named tables. Absent sections yield header-only tables.
pub fn emit_csv(report: &AssessmentReport) -> BTreeMap<String, String> {
    let mut tables = BTreeMap::new();

    let mut scores = String::from(SCORES_CSV_HEADER);
    scores.push('\n');
    for (i, id) in report.attack_ids.iter().enumerate() {
        scores.push_str(&format!(
            "{},{},{},{}\n",
            id,
            fmt(report.breakdown.omega[i]),
            fmt(report.breakdown.omega_adjusted[i]),
            fmt(report.breakdown.kappa[i]),
        ));
    }
    tables.insert("scores.csv".to_string(), scores);

    let mut layers = String::from(LAYERS_CSV_HEADER);
    layers.push('\n');
    for layer in LayerId::ALL {
        layers.push_str(&format!(
            "{},{}\n",
            layer.code(),
            fmt(report.breakdown.layer_scores[&layer])
        ));
    }
    tables.insert("layers.csv".to_string(), layers);

    let mut cascades = String::from(CASCADES_CSV_HEADER);
    cascades.push('\n');
    if let Some(section) = &report.cascades {
        for r in &section.top {
            cascades.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.path.label(),
                r.attack_id,
                fmt(r.path.strength),
                fmt(r.defense_gap),
                fmt(r.crr),
                fmt(r.cci),
            ));
        }
    }
    tables.insert("cascades.csv".to_string(), cascades);

    let mut mc = String::from(MC_CSV_HEADER);
    mc.push('\n');
    if let Some(summaries) = &report.mc {
        for (metric, s) in summaries {
            mc.push_str(&format!(
                "{},{},{},{},{},{}\n",
                metric,
                fmt(s.mean),
                fmt(s.std_dev),
                fmt(s.median),
                fmt(s.p5),
                fmt(s.p95),
            ));
        }
    }
    tables.insert("mc.csv".to_string(), mc);

    tables
}

/// One what-if row: the aggregate a single μ change would produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaEntry {
    pub defense_id: String,
    pub proposed_mu: f64,
    pub new_aggregate: f64,
    /// Percentage-point gain over the baseline (previous state when
    /// cumulative).
    pub gain: f64,
}

/// Defense-upgrade ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub baseline_percent: f64,
    pub cumulative: bool,
    pub entries: Vec<DeltaEntry>,
}

/// Evaluate μ-change proposals by full pipeline reruns. Independent mode
/// scores each proposal against the baseline and sorts by gain; cumulative
/// mode applies them in order and keeps that order.
pub fn whatif(
    catalog: &Catalog,
    assessment: &PlatformAssessment,
    proposals: &[(String, f64)],
    cumulative: bool,
    allow_continuous: bool,
) -> Result<DeltaReport> {
    for (id, mu) in proposals {
        if catalog.defense_index(id).is_none() {
            return Err(Error::Bind(format!("proposal references unknown defense {id:?}")));
        }
        let valid = if allow_continuous {
            (0.0..=1.0).contains(mu)
        } else {
            is_capability_level(*mu)
        };
        if !valid {
            return Err(Error::Bind(format!(
                "proposal level {} for {} is invalid (levels {:?})",
                mu, id, CAPABILITY_LEVELS
            )));
        }
    }

    let baseline_percent = score_platform(catalog, assessment)?.aggregate_percent;
    let mut entries = Vec::with_capacity(proposals.len());
    if cumulative {
        let mut current = assessment.clone();
        let mut reference = baseline_percent;
        for (id, mu) in proposals {
            current = current.with_mu(id, *mu);
            let new_aggregate = score_platform(catalog, &current)?.aggregate_percent;
            entries.push(DeltaEntry {
                defense_id: id.clone(),
                proposed_mu: *mu,
                new_aggregate,
                gain: new_aggregate - reference,
            });
            reference = new_aggregate;
        }
    } else {
        for (id, mu) in proposals {
            let new_aggregate =
                score_platform(catalog, &assessment.with_mu(id, *mu))?.aggregate_percent;
            entries.push(DeltaEntry {
                defense_id: id.clone(),
                proposed_mu: *mu,
                new_aggregate,
                gain: new_aggregate - baseline_percent,
            });
        }
        entries.sort_by(|a, b| {
            b.gain
                .partial_cmp(&a.gain)
                .expect("gains are finite")
                .then_with(|| a.defense_id.cmp(&b.defense_id))
                .then_with(|| a.proposed_mu.total_cmp(&b.proposed_mu))
        });
    }
    Ok(DeltaReport {
        baseline_percent,
        cumulative,
        entries,
    })
}
