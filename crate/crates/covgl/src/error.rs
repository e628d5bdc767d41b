//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Exhaustive subset enumeration refused: the count of Gram sub-matrices
    /// exceeds the caller's budget. The restricted eigenvalue is an exact
    /// infimum, so we refuse instead of sub-sampling.
    #[error("subset enumeration would visit {subsets} sub-matrices, over the budget of {budget}")]
    BudgetExceeded { subsets: u128, budget: u128 },

    #[error(
        "Gram matrix is numerically singular: condition number {cond:.3e} exceeds {limit:.1e}"
    )]
    SingularGram { cond: f64, limit: f64 },

    #[error("linear algebra backend failed: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error("replicate {replicate} failed: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}, column {column}: {message}")]
    CsvParse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
