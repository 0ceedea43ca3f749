use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at grid index {index}")]
    NonFinite { index: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("ball does not intersect the box")]
    EmptySupport,

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ill-conditioned Gram system (condition number {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("moment projection annihilated the seed function")]
    DegenerateSeed,

    #[error("kernel exponent alpha_{index} = {exponent} is not locally integrable in dimension {dim}")]
    NonIntegrableKernel { index: usize, exponent: f64, dim: usize },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
