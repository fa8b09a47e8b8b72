use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid slate spec: {0}")]
    InvalidSpec(String),

    #[error("invalid slate: {0}")]
    InvalidSlate(String),

    #[error("invalid distribution for slot {slot}: {reason}")]
    InvalidDistribution { slot: usize, reason: String },

    #[error("absolute continuity violated at slot {slot}, action {action}: target probability > 0 but logging probability is 0")]
    AbsoluteContinuity { slot: usize, action: usize },

    #[error("degenerate slot {slot}: divergence {alpha} must be > 0")]
    DegenerateSlot { slot: usize, alpha: f64 },

    #[error("enumeration of {slates} slates exceeds the cap of {cap}")]
    Capacity { slates: String, cap: u64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("need at least {needed} points for a fit, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
