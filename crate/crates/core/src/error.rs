use std::io;

use thiserror::Error;

/// Errors raised anywhere in the imputation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("csv parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),

    #[error("table has no data rows")]
    EmptyTable,

    #[error("label `{0}` is not in the column's category dictionary")]
    UnknownLabel(String),

    #[error("cannot decode non-finite value {0}")]
    NonFinite(f64),

    #[error("column `{0}` has no observed values")]
    NoObservedValues(String),

    #[error("nothing to impute: every column was excluded")]
    NothingToImpute,

    #[error("invalid value for `{name}`: {value} (expected {expected})")]
    OutOfRange {
        name: &'static str,
        value: String,
        expected: String,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix contains a negative entry ({0}) but non-negative factorization was requested")]
    NegativeEntry(f64),

    #[error("invalid training data: {0}")]
    InvalidData(String),

    #[error("class {0:?} never occurs in the training labels")]
    MissingClasses(Vec<usize>),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn range(name: &'static str, value: impl ToString, expected: impl Into<String>) -> Self {
        Error::OutOfRange {
            name,
            value: value.to_string(),
            expected: expected.into(),
        }
    }
}
