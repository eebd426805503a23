use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rank out of range: {0}")]
    RankOutOfRange(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("matrix is not symmetric positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("quadrature did not converge: estimate {estimate}, error bound {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("missing quantile: {0}")]
    MissingQuantile(String),

    #[error("identity check failed: {0}")]
    IdentityViolation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn rank(msg: impl Into<String>) -> Self {
        Error::RankOutOfRange(msg.into())
    }
}
