use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("explicit scheme unstable: dt = {dt:e} must be below {limit:e}")]
    Unstable { dt: f64, limit: f64 },

    #[error("non-positive field value {value:e} at node {node}")]
    NonPositive { node: usize, value: f64 },

    #[error("solution reached u = 1 at r = {r} before the boundary")]
    SingularBeforeBoundary { r: f64 },

    #[error("no sign change for lambda in [{lo:e}, {hi:e}] at alpha = {alpha}")]
    NoBracket { alpha: f64, lo: f64, hi: f64 },

    #[error("no admissible sample on the stationary branch")]
    EmptyBranch,

    #[error("insufficient data span: {0}")]
    InsufficientSpan(String),

    #[error("too few nodes: need {needed}, have {have}")]
    TooFewNodes { needed: usize, have: usize },

    #[error("negative bracket {0:e} in local expansion")]
    NegativeBracket(f64),

    #[error("insufficient similarity range: {0}")]
    InsufficientRange(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
