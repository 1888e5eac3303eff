use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field parameters: {0}")]
    InvalidField(String),
    #[error("multiplicative inverse of zero")]
    InverseOfZero,
    #[error("probability out of range: {0}")]
    InvalidProbability(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid code parameters: {0}")]
    InvalidCode(String),
    #[error("code validation failed: {0}")]
    Validation(String),
    #[error("parity check matrix rank-deficient after {0} construction attempts")]
    RankDeficient(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported code family: kind={kind} t={t}")]
    UnsupportedFamily { kind: String, t: u32 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("not enough data points: need {need}, got {got}")]
    InsufficientData { need: usize, got: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
