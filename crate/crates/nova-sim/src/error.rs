//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by space construction, sampling, the loop engine,
/// estimators, and the closed-form analysis functions.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented range.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A knowledge space needs at least one valid artifact.
    #[error("empty domain: n_valid must be at least 1")]
    EmptyDomain,

    /// All weights are zero; nothing can be sampled.
    #[error("degenerate distribution: total weight is zero")]
    DegenerateDistribution,

    /// Every valid artifact is already discovered; the conditional tail is empty.
    #[error("empty tail: all valid artifacts are discovered")]
    EmptyTail,

    /// An estimator was asked for a reading on an empty batch.
    #[error("undefined estimate: batch size is zero")]
    UndefinedEstimate,

    /// A marginal contamination fraction with zero accepted increments.
    #[error("undefined fraction: denominator is zero")]
    UndefinedFraction,

    /// The stationary verification effort is undefined when no new-valid mass remains.
    #[error("frontier degenerate: m_new is zero")]
    FrontierDegenerate,

    /// An amplification report needs a positive autonomous baseline.
    #[error("degenerate baseline: {0}")]
    DegenerateBaseline(String),

    /// A regression was requested on too few points.
    #[error("underdetermined fit: need at least {needed} points, got {got}")]
    Underdetermined { needed: usize, got: usize },

    /// Configuration parsing or validation failure.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
