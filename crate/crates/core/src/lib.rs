//! RISK-MAP: a quantitative security-assessment engine for layered robotic
//! architectures.
//!
//! The engine scores a platform's defensive posture against a catalog of
//! attacks and defenses organized into seven architectural layers, produces
//! per-layer diagnostics, enumerates cross-layer attack cascades with
//! residual-risk scores, and quantifies input uncertainty with seeded Monte
//! Carlo simulation. Everything is deterministic: catalogs are fingerprinted,
//! random streams are keyed by (seed, iteration, input index), and all
//! emitters produce canonical bytes.

pub mod assessment;
pub mod canonical;
pub mod cascade;
pub mod catalog;
pub mod error;
pub mod layer;
pub mod matrix;
pub mod radar;
pub mod report;
pub mod scoring;
pub mod uncertainty;

pub use assessment::{bind, validate_assessment, BoundAssessment, OverrideEntry, PlatformAssessment};
pub use cascade::{
    analyze_cascades, cascade_residual_risk, coupling_matrix, defense_gap,
    enumerate_two_hop_paths, layer_coverage, top_k_cascades, validate_coupling, CascadeAnalysis,
    CascadeConfig, CascadePath, CascadeRisk, CouplingInputs, LayerCoverageMode,
    LayerCoverageVector,
};
pub use catalog::{
    layer_partition, load_catalog, load_catalog_from_slice, parse_catalog, validate_catalog,
    AttackVector, Catalog, DefenseMechanism, LayerPartition, LoadOptions, ValidationMode,
    ValidationReport, Violation, ViolationCode,
};
pub use error::{Error, Result};
pub use layer::{LayerId, LAYER_COUNT};
pub use matrix::Matrix;
pub use radar::emit_radar_svg;
pub use report::{
    build_report, emit_csv, emit_json, whatif, AssessmentReport, CascadeSection, ConfigEcho,
    DeltaEntry, DeltaReport,
};
pub use scoring::{
    adjusted_severity, compute_breakdown, effective_coverage, layer_scores, riskmap_score,
    score_platform, severity, total_coverage, ScoreBreakdown,
};
pub use uncertainty::{
    percentile, perturb, run_monte_carlo, run_monte_carlo_threaded, unit_draw,
    DistributionSummary, McConfig, McResults, NoiseModel, NoiseSpec, NoiseTarget, DEFAULT_SEED,
    RNG_ID,
};
