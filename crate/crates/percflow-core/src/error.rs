//! Crate-wide error type.

use thiserror::Error;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite gradient component; update aborted")]
    NonFiniteGradient,

    #[error("matrix is not symmetric within tolerance")]
    NotSymmetric,

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("state diverged at step {step} (|component| > {limit:e})")]
    Divergence { step: usize, limit: f64 },

    #[error("unknown condition id {0}")]
    UnknownCondition(usize),

    #[error("no reward landscape assigned for condition {0}")]
    MissingLandscape(usize),

    #[error("group too small: need at least {need} members, got {got}")]
    GroupTooSmall { need: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("zero-norm feature vector at index {0}")]
    ZeroNormFeature(usize),

    #[error("degenerate regressor: all entropy values equal")]
    DegenerateRegressor,

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("checkpoint encoding: {0}")]
    Json(#[from] serde_json::Error),
}
