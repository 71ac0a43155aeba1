use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the engine and the fusion toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {field} {reason}")]
    Config { field: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected} features, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unknown class label {0}")]
    UnknownClass(u32),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("descriptions are not comparable: {0}")]
    Comparison(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("missing statistic for feature `{0}`")]
    MissingStat(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config { field, reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
