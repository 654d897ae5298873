use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("problem size {size} exceeds the limit of {limit} ({what})")]
    TooLarge {
        what: &'static str,
        size: u128,
        limit: u128,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("potential is not admissible: {0}")]
    Inadmissible(String),
    #[error("index {index:?} out of range 1..={max}")]
    IndexOutOfRange { index: Vec<usize>, max: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
