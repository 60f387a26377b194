//! Attack/defense taxonomy, the baseline coverage matrix, and catalog file I/O.
//!
//! A catalog is immutable after load. The shipped default (39 attacks, 35
//! defenses) is embedded in the binary; its numeric values are illustrative
//! placeholders (`illustrative: true`) and every report echoes the catalog
//! fingerprint so scores are always attributable to the data behind them.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::error::{Error, Result};
use crate::layer::LayerId;
use crate::matrix::Matrix;

/// Baseline capability levels for γ and implementation levels for μ.
pub const CAPABILITY_LEVELS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
/// Discrete impact scale for ι.
pub const IMPACT_LEVELS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

pub fn is_capability_level(x: f64) -> bool {
    CAPABILITY_LEVELS.contains(&x)
}

pub fn is_impact_level(x: f64) -> bool {
    IMPACT_LEVELS.contains(&x)
}

/// One attack vector. `detectability` scales the attack's weight in cascade
/// analysis and defaults to 1.0 (fully weighted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackVector {
    pub id: String,
    pub layer: LayerId,
    pub name: String,
    pub likelihood: f64,
    pub impact: f64,
    #[serde(default = "default_detectability")]
    pub detectability: f64,
    #[serde(default)]
    pub references: Vec<String>,
}

fn default_detectability() -> f64 {
    1.0
}

/// One defense mechanism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefenseMechanism {
    pub id: String,
    pub layer: LayerId,
    pub name: String,
    #[serde(default)]
    pub references: Vec<String>,
}

/// The full taxonomy plus the baseline coverage matrix Γ.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub version: String,
    pub attacks: Vec<AttackVector>,
    pub defenses: Vec<DefenseMechanism>,
    pub gamma: Matrix,
    pub illustrative: bool,
    /// SHA-256 of the canonical file form, computed at load/construction.
    pub fingerprint: String,
}

/// Wire format of a catalog file. `layers` is a fixed sanity-check array of
/// the seven codes in ordinal order.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CatalogFile {
    version: String,
    layers: Vec<String>,
    attacks: Vec<AttackVector>,
    defenses: Vec<DefenseMechanism>,
    gamma: Matrix,
    #[serde(default)]
    illustrative: bool,
}

fn ordinal_layer_codes() -> Vec<String> {
    LayerId::ALL.iter().map(|l| l.code().to_string()).collect()
}

/// Validation strictness. Strict enforces the discrete γ/ι/μ level sets;
/// Continuous relaxes them to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValidationMode {
    #[default]
    Strict,
    Continuous,
}

/// Options for loading files.
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub allow_continuous: bool,
}

impl LoadOptions {
    pub fn mode(self) -> ValidationMode {
        if self.allow_continuous {
            ValidationMode::Continuous
        } else {
            ValidationMode::Strict
        }
    }
}

/// Machine-readable violation codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    IdFormat,
    IdLayerMismatch,
    DuplicateId,
    DimMismatch,
    GammaLevel,
    GammaRange,
    LikelihoodRange,
    ImpactLevel,
    ImpactRange,
    DetectabilityRange,
    LayerSequence,
    ApplicabilityValue,
    MuLevel,
    MuRange,
    OverrideRange,
    WeightSum,
    EntryRange,
}

/// One violated invariant: a stable code, the field path, and a message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub path: String,
    pub message: String,
}

impl Violation {
    fn new(code: ViolationCode, path: impl Into<String>, message: impl Into<String>) -> Violation {
        Violation {
            code,
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Every violated invariant found in a document. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, code: ViolationCode, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation::new(code, path, message));
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    /// Fail with `Error::Validation` unless the report is empty.
    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} violation(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "; [{:?}] {}: {}", v.code, v.path, v.message)?;
        }
        Ok(())
    }
}

impl Catalog {
    /// Construct from parts, computing the fingerprint. Does not validate;
    /// call [`validate_catalog`] or use [`load_catalog_from_slice`].
    pub fn new(
        version: impl Into<String>,
        attacks: Vec<AttackVector>,
        defenses: Vec<DefenseMechanism>,
        gamma: Matrix,
        illustrative: bool,
    ) -> Result<Catalog> {
        let mut catalog = Catalog {
            version: version.into(),
            attacks,
            defenses,
            gamma,
            illustrative,
            fingerprint: String::new(),
        };
        catalog.fingerprint = canonical::fingerprint(&catalog.to_file())?;
        Ok(catalog)
    }

    /// The embedded default catalog. The data file is part of the crate, so
    /// a failure here is a build defect.
    pub fn shipped() -> Catalog {
        load_catalog_from_slice(SHIPPED_CATALOG_JSON.as_bytes(), LoadOptions::default())
            .expect("embedded catalog must be valid")
    }

    fn to_file(&self) -> CatalogFile {
        CatalogFile {
            version: self.version.clone(),
            layers: ordinal_layer_codes(),
            attacks: self.attacks.clone(),
            defenses: self.defenses.clone(),
            gamma: self.gamma.clone(),
            illustrative: self.illustrative,
        }
    }

    /// Canonical file bytes: `load(emit(c))` preserves the fingerprint.
    pub fn emit(&self) -> Result<Vec<u8>> {
        canonical::canonical_bytes(&self.to_file())
    }

    pub fn attack_index(&self, id: &str) -> Option<usize> {
        self.attacks.iter().position(|a| a.id == id)
    }

    pub fn defense_index(&self, id: &str) -> Option<usize> {
        self.defenses.iter().position(|d| d.id == id)
    }

    /// Defense column indices per layer, in catalog column order.
    pub fn defense_columns(&self) -> BTreeMap<LayerId, Vec<usize>> {
        let mut out: BTreeMap<LayerId, Vec<usize>> =
            LayerId::ALL.iter().map(|&l| (l, Vec::new())).collect();
        for (j, d) in self.defenses.iter().enumerate() {
            out.get_mut(&d.layer).expect("all layers present").push(j);
        }
        out
    }

    /// Attack row indices per layer, in catalog row order.
    pub fn attack_rows(&self) -> BTreeMap<LayerId, Vec<usize>> {
        let mut out: BTreeMap<LayerId, Vec<usize>> =
            LayerId::ALL.iter().map(|&l| (l, Vec::new())).collect();
        for (i, a) in self.attacks.iter().enumerate() {
            out.get_mut(&a.layer).expect("all layers present").push(i);
        }
        out
    }
}

pub(crate) const SHIPPED_CATALOG_JSON: &str = include_str!("../data/catalog.json");

/// Parse a catalog without validating. File-level structure problems (the
/// `layers` array) are returned alongside so linting can report them.
pub fn parse_catalog(bytes: &[u8]) -> Result<(Catalog, ValidationReport)> {
    let file: CatalogFile = serde_json::from_slice(bytes)?;
    let mut report = ValidationReport::default();
    if file.layers != ordinal_layer_codes() {
        report.push(
            ViolationCode::LayerSequence,
            "layers",
            format!(
                "expected the seven layer codes in ordinal order, got {:?}",
                file.layers
            ),
        );
    }
    let fingerprint = canonical::fingerprint(&CatalogFile {
        layers: ordinal_layer_codes(),
        ..file.clone()
    })?;
    let catalog = Catalog {
        version: file.version,
        attacks: file.attacks,
        defenses: file.defenses,
        gamma: file.gamma,
        illustrative: file.illustrative,
        fingerprint,
    };
    Ok((catalog, report))
}

/// Load and validate a catalog from raw bytes.
pub fn load_catalog_from_slice(bytes: &[u8], options: LoadOptions) -> Result<Catalog> {
    let (catalog, mut report) = parse_catalog(bytes)?;
    report.merge(validate_catalog(&catalog, options.mode()));
    report.into_result()?;
    Ok(catalog)
}

/// Load and validate a catalog from a file path.
pub fn load_catalog(path: impl AsRef<Path>, options: LoadOptions) -> Result<Catalog> {
    let bytes = std::fs::read(path)?;
    load_catalog_from_slice(&bytes, options)
}

fn check_id(
    report: &mut ValidationReport,
    kind: char,
    idx: usize,
    list: &str,
    id: &str,
    layer: LayerId,
) {
    let Some((prefix, rest)) = id.split_once('-') else {
        report.push(
            ViolationCode::IdFormat,
            format!("{list}[{idx}].id"),
            format!("id {id:?} is not of the form <LAYER>-{kind}<n>"),
        );
        return;
    };
    let well_formed = rest.len() > 1
        && rest.starts_with(kind)
        && rest[1..].bytes().all(|b| b.is_ascii_digit())
        && LayerId::from_code(prefix).is_some();
    if !well_formed {
        report.push(
            ViolationCode::IdFormat,
            format!("{list}[{idx}].id"),
            format!("id {id:?} is not of the form <LAYER>-{kind}<n>"),
        );
        return;
    }
    if prefix != layer.code() {
        report.push(
            ViolationCode::IdLayerMismatch,
            format!("{list}[{idx}].id"),
            format!(
                "id {:?} has layer prefix {:?} but is assigned to layer {}",
                id,
                prefix,
                layer.code()
            ),
        );
    }
}

fn check_unique(report: &mut ValidationReport, list: &str, ids: impl Iterator<Item = String>) {
    let mut seen = BTreeSet::new();
    for (idx, id) in ids.enumerate() {
        if !seen.insert(id.clone()) {
            report.push(
                ViolationCode::DuplicateId,
                format!("{list}[{idx}].id"),
                format!("duplicate id {id:?}"),
            );
        }
    }
}

/// Check every catalog invariant; violations are data, not failures.
pub fn validate_catalog(catalog: &Catalog, mode: ValidationMode) -> ValidationReport {
    let mut report = ValidationReport::default();

    for (i, attack) in catalog.attacks.iter().enumerate() {
        check_id(&mut report, 'A', i, "attacks", &attack.id, attack.layer);
        if !(attack.likelihood >= 0.0 && attack.likelihood <= 1.0) {
            report.push(
                ViolationCode::LikelihoodRange,
                format!("attacks[{i}].likelihood"),
                format!("likelihood {} outside [0, 1]", attack.likelihood),
            );
        }
        match mode {
            ValidationMode::Strict => {
                if !is_impact_level(attack.impact) {
                    report.push(
                        ViolationCode::ImpactLevel,
                        format!("attacks[{i}].impact"),
                        format!(
                            "impact {} is not one of {:?}",
                            attack.impact, IMPACT_LEVELS
                        ),
                    );
                }
            }
            ValidationMode::Continuous => {
                if !(attack.impact >= 0.0 && attack.impact <= 1.0) {
                    report.push(
                        ViolationCode::ImpactRange,
                        format!("attacks[{i}].impact"),
                        format!("impact {} outside [0, 1]", attack.impact),
                    );
                }
            }
        }
        if !(attack.detectability > 0.0 && attack.detectability <= 1.0) {
            report.push(
                ViolationCode::DetectabilityRange,
                format!("attacks[{i}].detectability"),
                format!("detectability {} outside (0, 1]", attack.detectability),
            );
        }
    }
    check_unique(
        &mut report,
        "attacks",
        catalog.attacks.iter().map(|a| a.id.clone()),
    );

    for (j, defense) in catalog.defenses.iter().enumerate() {
        check_id(&mut report, 'D', j, "defenses", &defense.id, defense.layer);
    }
    check_unique(
        &mut report,
        "defenses",
        catalog.defenses.iter().map(|d| d.id.clone()),
    );

    if catalog.gamma.rows() != catalog.attacks.len() {
        report.push(
            ViolationCode::DimMismatch,
            "gamma",
            format!(
                "gamma has {} rows but the catalog has {} attacks",
                catalog.gamma.rows(),
                catalog.attacks.len()
            ),
        );
    }
    if catalog.gamma.cols() != catalog.defenses.len() && catalog.gamma.rows() > 0 {
        report.push(
            ViolationCode::DimMismatch,
            "gamma",
            format!(
                "gamma has {} columns but the catalog has {} defenses",
                catalog.gamma.cols(),
                catalog.defenses.len()
            ),
        );
    }
    for i in 0..catalog.gamma.rows() {
        for j in 0..catalog.gamma.cols() {
            let g = catalog.gamma.get(i, j);
            match mode {
                ValidationMode::Strict => {
                    if !is_capability_level(g) {
                        report.push(
                            ViolationCode::GammaLevel,
                            format!("gamma[{i}][{j}]"),
                            format!("gamma {} is not one of {:?}", g, CAPABILITY_LEVELS),
                        );
                    }
                }
                ValidationMode::Continuous => {
                    if !(0.0..=1.0).contains(&g) {
                        report.push(
                            ViolationCode::GammaRange,
                            format!("gamma[{i}][{j}]"),
                            format!("gamma {g} outside [0, 1]"),
                        );
                    }
                }
            }
        }
    }

    report
}

/// Per-layer buckets of attack and defense ids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerPartition {
    pub attacks: BTreeMap<LayerId, Vec<String>>,
    pub defenses: BTreeMap<LayerId, Vec<String>>,
}

/// Partition the catalog's ids by layer. Every id lands in exactly one
/// bucket; the union is the whole catalog.
pub fn layer_partition(catalog: &Catalog) -> LayerPartition {
    let mut attacks: BTreeMap<LayerId, Vec<String>> =
        LayerId::ALL.iter().map(|&l| (l, Vec::new())).collect();
    let mut defenses = attacks.clone();
    for a in &catalog.attacks {
        attacks.get_mut(&a.layer).expect("all layers present").push(a.id.clone());
    }
    for d in &catalog.defenses {
        defenses.get_mut(&d.layer).expect("all layers present").push(d.id.clone());
    }
    LayerPartition { attacks, defenses }
}
