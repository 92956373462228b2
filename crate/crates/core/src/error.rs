use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix does not match the dimension of the algebra it is used with.
    #[error("conformance error: {0}")]
    Conformance(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("rank deficiency: {0}")]
    Rank(String),
    /// A dense tensor would exceed the configured memory budget.
    #[error("resource guard: {0}")]
    Resource(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn conform(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Conformance(format!(
            "{what}: expected length {expected}, got {got}"
        )))
    }
}
