use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{which} measure is empty")]
    EmptyMeasure { which: &'static str },

    #[error("invalid {which} atom at index {index}: {reason}")]
    InvalidAtom {
        which: &'static str,
        index: usize,
        reason: String,
    },

    #[error("parse error in {context}: {reason}")]
    Parse { context: String, reason: String },

    #[error("power iteration did not converge after {iterations} iterations (estimate {estimate}, residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        estimate: f64,
        residual: f64,
    },

    #[error("check failed: {0}")]
    Violation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
