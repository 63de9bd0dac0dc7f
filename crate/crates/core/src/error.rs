use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("dataset `{0}` is empty")]
    EmptyDataset(String),

    #[error("column `{0}` has no non-null values")]
    EmptySample(String),

    #[error("invalid pattern `{id}`: {message}")]
    Pattern { id: String, message: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("degenerate training data: {0}")]
    DegenerateLabels(String),

    #[error("column `{0}` has no label")]
    MissingLabel(String),

    #[error("background set is empty")]
    EmptyBackground,

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("stratification failed: {0}")]
    Stratification(String),

    #[error("model format: {0}")]
    ModelFormat(String),

    #[error("invalid corpus spec: {0}")]
    InvalidSpec(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
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
