use chrono::NaiveDate;
use thiserror::Error;

/// Errors raised anywhere in the estimation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{file}: missing required column `{column}`")]
    Schema { file: String, column: String },

    #[error("{file}: duplicate key {key}")]
    Duplicate { file: String, key: String },

    #[error("{file}: no data rows")]
    EmptyInput { file: String },

    #[error("{file}: {message}")]
    Io { file: String, message: String },

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("design matrix is rank deficient (column {column})")]
    SingularDesign { column: usize },

    #[error("underdetermined system: {rows} rows for {cols} columns")]
    Underdetermined { rows: usize, cols: usize },

    #[error("numerical overflow at index {index}")]
    NumericalOverflow { index: usize },

    #[error("statistic undefined: {0}")]
    UndefinedStatistic(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("inconsistent event: cannot {action} {stock_id} on {date}")]
    InconsistentEvent {
        stock_id: String,
        date: NaiveDate,
        action: String,
    },

    #[error("regressor `{column}` is collinear with the fixed effects or other regressors")]
    Collinear { column: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
