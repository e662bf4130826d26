use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("flux exponents must be strictly increasing positive integers, got {0:?}")]
    NonIncreasingExponents(Vec<u32>),

    #[error("state value must be nonnegative, got {0}")]
    NegativeState(f64),

    #[error("weight function must be positive, got {value} at s = {at}")]
    NonPositiveWeight { value: f64, at: f64 },

    #[error("quadrature did not converge: entry change {change:e} on refinement")]
    QuadratureNotConverged { change: f64 },

    #[error("state grid must start at 0 and increase strictly")]
    NonMonotoneGrid,

    #[error("CFL violation: courant number {courant} exceeds 1")]
    CflViolation { courant: f64 },

    #[error("non-finite value in field at t = {time}")]
    NonFinite { time: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("initial data support touches the boundary layer along axis {axis}")]
    SupportTouchesBoundary { axis: usize },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("non-positive sample {value} at index {index}")]
    NonPositiveSample { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
