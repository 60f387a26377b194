//! Per-platform assessments: applicability, implementation levels, overrides.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::catalog::{
    is_capability_level, is_impact_level, Catalog, LoadOptions, ValidationMode, ValidationReport,
    ViolationCode, CAPABILITY_LEVELS, IMPACT_LEVELS,
};
use crate::error::{Error, Result};

/// Per-attack replacement of the catalog's likelihood and/or impact.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OverrideEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub likelihood: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub impact: Option<f64>,
}

/// One platform's assessment against a catalog: the binary applicability
/// vector Z, the implementation vector μ, and optional λ/ι overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformAssessment {
    pub platform: String,
    /// Attack id → 0/1.
    pub applicability: BTreeMap<String, u8>,
    /// Defense id → implementation level.
    pub implementation: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<String, OverrideEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl PlatformAssessment {
    pub fn parse(bytes: &[u8]) -> Result<PlatformAssessment> {
        Ok(serde_json::from_slice(bytes)?)
    }

    pub fn load(path: impl AsRef<Path>, options: LoadOptions) -> Result<PlatformAssessment> {
        let bytes = std::fs::read(path)?;
        let assessment = Self::parse(&bytes)?;
        validate_assessment(&assessment, options.mode()).into_result()?;
        Ok(assessment)
    }

    pub fn emit(&self) -> Result<Vec<u8>> {
        canonical::canonical_bytes(self)
    }

    pub fn fingerprint(&self) -> Result<String> {
        canonical::fingerprint(self)
    }

    /// Copy with one implementation level replaced. Used by what-if reruns.
    pub fn with_mu(&self, defense_id: &str, mu: f64) -> PlatformAssessment {
        let mut out = self.clone();
        out.implementation.insert(defense_id.to_string(), mu);
        out
    }
}

/// Standalone lint of an assessment document (no catalog needed).
pub fn validate_assessment(a: &PlatformAssessment, mode: ValidationMode) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (id, &z) in &a.applicability {
        if z > 1 {
            report.push(
                ViolationCode::ApplicabilityValue,
                format!("applicability.{id}"),
                format!("applicability {z} is not 0 or 1"),
            );
        }
    }
    for (id, &mu) in &a.implementation {
        match mode {
            ValidationMode::Strict => {
                if !is_capability_level(mu) {
                    report.push(
                        ViolationCode::MuLevel,
                        format!("implementation.{id}"),
                        format!("implementation {} is not one of {:?}", mu, CAPABILITY_LEVELS),
                    );
                }
            }
            ValidationMode::Continuous => {
                if !(0.0..=1.0).contains(&mu) {
                    report.push(
                        ViolationCode::MuRange,
                        format!("implementation.{id}"),
                        format!("implementation {mu} outside [0, 1]"),
                    );
                }
            }
        }
    }
    for (id, entry) in &a.overrides {
        if let Some(l) = entry.likelihood {
            if !(0.0..=1.0).contains(&l) {
                report.push(
                    ViolationCode::OverrideRange,
                    format!("overrides.{id}.likelihood"),
                    format!("likelihood override {l} outside [0, 1]"),
                );
            }
        }
        if let Some(i) = entry.impact {
            let ok = match mode {
                ValidationMode::Strict => is_impact_level(i),
                ValidationMode::Continuous => (0.0..=1.0).contains(&i),
            };
            if !ok {
                report.push(
                    ViolationCode::OverrideRange,
                    format!("overrides.{id}.impact"),
                    format!("impact override {} invalid (levels {:?})", i, IMPACT_LEVELS),
                );
            }
        }
    }
    report
}

/// An assessment bound to a catalog: vectors aligned to catalog order with
/// overrides already applied.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundAssessment {
    pub applicability: Vec<bool>,
    pub mu: Vec<f64>,
    pub likelihood: Vec<f64>,
    pub impact: Vec<f64>,
    pub detectability: Vec<f64>,
}

fn key_mismatch(what: &str, missing: &[&String], extra: &[&String]) -> Error {
    let mut parts = Vec::new();
    if !missing.is_empty() {
        parts.push(format!("missing {missing:?}"));
    }
    if !extra.is_empty() {
        parts.push(format!("unknown {extra:?}"));
    }
    Error::Bind(format!("{what} ids do not match the catalog: {}", parts.join(", ")))
}

/// Bind an assessment to a catalog. The applicability and implementation key
/// sets must match the catalog's id sets exactly; overrides must reference
/// catalog attacks.
pub fn bind(catalog: &Catalog, assessment: &PlatformAssessment) -> Result<BoundAssessment> {
    let attack_ids: Vec<&String> = catalog.attacks.iter().map(|a| &a.id).collect();
    let defense_ids: Vec<&String> = catalog.defenses.iter().map(|d| &d.id).collect();

    let missing: Vec<&String> = attack_ids
        .iter()
        .copied()
        .filter(|id| !assessment.applicability.contains_key(*id))
        .collect();
    let extra: Vec<&String> = assessment
        .applicability
        .keys()
        .filter(|id| !attack_ids.contains(id))
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(key_mismatch("applicability", &missing, &extra));
    }

    let missing: Vec<&String> = defense_ids
        .iter()
        .copied()
        .filter(|id| !assessment.implementation.contains_key(*id))
        .collect();
    let extra: Vec<&String> = assessment
        .implementation
        .keys()
        .filter(|id| !defense_ids.contains(id))
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(key_mismatch("implementation", &missing, &extra));
    }

    for id in assessment.overrides.keys() {
        if !attack_ids.contains(&id) {
            return Err(Error::Bind(format!("override references unknown attack {id:?}")));
        }
    }
    for (id, &z) in &assessment.applicability {
        if z > 1 {
            return Err(Error::Bind(format!("applicability for {id:?} is {z}, expected 0 or 1")));
        }
    }
    for (id, &mu) in &assessment.implementation {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::Bind(format!(
                "implementation level {mu} for {id:?} outside [0, 1]"
            )));
        }
    }

    let applicability = catalog
        .attacks
        .iter()
        .map(|a| assessment.applicability[&a.id] == 1)
        .collect();
    let mu = catalog
        .defenses
        .iter()
        .map(|d| assessment.implementation[&d.id])
        .collect();
    let mut likelihood = Vec::with_capacity(catalog.attacks.len());
    let mut impact = Vec::with_capacity(catalog.attacks.len());
    let detectability = catalog.attacks.iter().map(|a| a.detectability).collect();
    for attack in &catalog.attacks {
        let entry = assessment.overrides.get(&attack.id);
        likelihood.push(entry.and_then(|e| e.likelihood).unwrap_or(attack.likelihood));
        impact.push(entry.and_then(|e| e.impact).unwrap_or(attack.impact));
    }

    Ok(BoundAssessment {
        applicability,
        mu,
        likelihood,
        impact,
        detectability,
    })
}
