use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    NonNumeric {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("label column {0} not found")]
    MissingLabelColumn(String),

    #[error("dataset needs at least 2 samples and 2 features, got {samples}x{features}")]
    TooSmall { samples: usize, features: usize },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("duplicate feature name {0:?}")]
    DuplicateName(String),

    #[error("method requires class labels")]
    MissingLabels,

    #[error("need at least two distinct classes, found {0}")]
    SingleClass(usize),

    #[error("class {class} has {count} samples, need at least 2")]
    ClassTooSmall { class: i64, count: usize },

    #[error("train fraction {fraction} leaves an empty split")]
    EmptySplit { fraction: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },

    #[error("feature {index} has a non-finite score")]
    NonFiniteScore { index: usize },

    #[error("matrix entry ({row}, {column}) is negative")]
    NegativeEntry { row: usize, column: usize },

    #[error("matrix is all zero")]
    ZeroMatrix,

    #[error("power iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("geometric series solve failed (residual {residual:e} at r = {r})")]
    SolveFailed { r: f64, residual: f64 },

    #[error("cardinality {requested} exceeds feature count {available}")]
    CardinalityTooLarge { requested: usize, available: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
