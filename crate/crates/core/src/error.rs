use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("velocity dimension must be 1, 2 or 3 (got {0})")]
    InvalidDimension(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("negative value {value} at index {index} (cell {cell}, node {node})")]
    NegativeValue {
        index: usize,
        cell: usize,
        node: usize,
        value: f64,
    },

    #[error("density mismatch: reference rho={reference}, field rho={field} (relative tolerance {tolerance})")]
    DensityMismatch {
        reference: f64,
        field: f64,
        tolerance: f64,
    },

    #[error("temperature mismatch: reference T={reference}, requested T={requested}")]
    TemperatureMismatch { reference: f64, requested: f64 },

    #[error("reference Maxwellian must be at rest (|u|={speed}); only the zero-drift Maxwellian maximizes F")]
    DriftedReference { speed: f64 },

    #[error("infeasible: T1<=0 (T1={t1})")]
    Infeasible { t1: f64 },

    #[error("dual Newton did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("collision grid too large: {nodes} nodes exceeds limit {limit}")]
    CostExceeded { nodes: usize, limit: usize },

    #[error("time step dt={dt} exceeds relaxation time tau={tau}")]
    UnstableStep { dt: f64, tau: f64 },

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite (got {value})"),
        })
    }
}
