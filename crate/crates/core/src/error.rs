use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported Euclidean dimension d = {0} (supported: 2, 3)")]
    UnsupportedDimension(usize),

    #[error("operation requires a {expected} basis, got {got}")]
    WrongBasis { expected: &'static str, got: String },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("eigenvalue iteration did not converge")]
    EigenFailure,

    #[error("point {x} lies outside the tabulated range [{lo}, {hi}]")]
    OutOfGrid { x: f64, lo: f64, hi: f64 },

    #[error("grid too large for desk-scale run: {0}")]
    GridTooLarge(String),

    #[error("sign sequence disagrees with increment signs at index {0}")]
    SignMismatch(usize),

    #[error("not enough samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
