use thiserror::Error;

pub type Result<T> = std::result::Result<T, HardyError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HardyError {
    #[error("point ({x}, {y}) lies outside the closure of the domain")]
    DomainMembership { x: f64, y: f64 },

    #[error("operation not supported for {kind}: {what}")]
    UnsupportedKind { kind: String, what: String },

    #[error("layer depth {r} overlaps the opposite side (collapse depth {limit})")]
    LayerOverlap { r: f64, limit: f64 },

    #[error("degenerate geometry: {0}")]
    Geometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("exceptional value: {0}")]
    ExceptionalValue(String),

    #[error("singular weight evaluated on the boundary (exponent {exponent})")]
    Singularity { exponent: f64 },

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("iterative solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    IterativeFailure { iterations: usize, residual: f64 },

    #[error("matrix is not positive definite (pivot {row})")]
    NotPositiveDefinite { row: usize },

    #[error("eigensolver stagnated after {iterations} iterations (residual {residual:e})")]
    Stagnation { iterations: usize, residual: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("critical-angle protocol error: {0}")]
    Protocol(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl HardyError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        HardyError::InvalidParameter(msg.into())
    }
}
