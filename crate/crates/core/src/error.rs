use thiserror::Error;

/// Errors raised by the linear-space, filter and controller layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("linear combination needs nonempty lists of equal length (got {coeffs} coefficients and {states} states)")]
    BadCombination { coeffs: usize, states: usize },

    #[error("step ratio must be positive and finite, got {0}")]
    InvalidRatio(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("step size {dt:e} fell below the minimum {dt_min:e}")]
    StepUnderflow { dt: f64, dt_min: f64 },

    #[error("{0} consecutive rejected steps")]
    RejectStorm(u32),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure of an implicit solve (Newton or Picard).
#[derive(Debug, Clone, PartialEq, Error)]
#[error("implicit solve did not converge after {iterations} iterations (residual {residual:e})")]
pub struct SolveError {
    pub iterations: usize,
    pub residual: f64,
}
