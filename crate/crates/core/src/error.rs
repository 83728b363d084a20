use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("log_gamma is only defined here for positive arguments, got {0}")]
    GammaDomain(f64),

    #[error("hit probability is zero; pi cannot be recovered from an empty hit count")]
    ZeroProbability,

    #[error("hit probability must lie in (0, 1], got {0}")]
    ProbabilityOutOfRange(f64),

    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),

    #[error("hit count invariant violated: {hits} hits out of {trials} trials")]
    InvalidHitCount { hits: u64, trials: u64 },

    #[error("cannot merge hit counts of dimension {0} and {1}")]
    DimensionMismatch(u32, u32),

    #[error("random stream exhausted: {trials} trials at dimension {dimension} exceed the substream capacity")]
    StreamExhausted { dimension: u32, trials: u64 },

    #[error("target relative standard error must lie in (0, 1), got {0}")]
    TargetOutOfRange(f64),

    #[error("no default schedule for dimension {0}; supply an explicit or adaptive schedule")]
    NoDefaultSchedule(u32),

    #[error("every row for dimension {0} was dropped; nothing to aggregate")]
    EmptyAggregation(u32),

    #[error("sampling cell aborted: {0}")]
    CellAborted(String),

    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),

    #[error("invalid chart input: {0}")]
    InvalidChart(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
