use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("measure kinds differ: cannot combine a discrete measure with a grid density")]
    KindMismatch,

    #[error("support of size {size} exceeds the transport solver bound of {max}")]
    SupportTooLarge { size: usize, max: usize },

    #[error("transport solver failed: {0}")]
    Transport(String),

    #[error("invalid basis specification: {0}")]
    InvalidBasis(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("eigensolver did not converge: {0}")]
    Eigen(String),

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("grid captures only {captured:.3e} of the probability mass (required {required:.3e})")]
    GridCoverage { captured: f64, required: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
