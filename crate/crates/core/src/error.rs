use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time {0} is singular for vanishing damping (must be > 0)")]
    SingularTime(f64),

    #[error("non-finite value encountered at t = {0}")]
    NonFinite(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("perturbation is not admissible: {0}")]
    NotAdmissible(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("degenerate closed form: {0}")]
    Degenerate(String),

    #[error("tangential zero near t = {0}")]
    TangentialZero(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
