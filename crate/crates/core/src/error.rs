//! Error types shared across the engine.

use crate::catalog::ValidationReport;

/// Everything that can go wrong between a file on disk and a finished report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("validation failed: {0}")]
    Validation(ValidationReport),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch in {what}: expected {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// The severity-weighted denominator is zero: every attack is either
    /// inapplicable or has zero severity, so the score quotient is undefined.
    #[error("no applicable threats: weighted severity sums to zero")]
    NoApplicableThreats,

    #[error("bind error: {0}")]
    Bind(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("empty sample")]
    EmptySample,

    #[error("unsupported configuration: {0}")]
    UnsupportedConfig(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
