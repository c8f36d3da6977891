use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("nonpositive weight {weight} at atom {index}")]
    NonpositiveWeight { index: usize, weight: f64 },

    #[error("surface has no atoms")]
    EmptySurface,

    #[error("enumeration of {count} terms exceeds the cap of {cap}; use a Monte Carlo route")]
    CapExceeded { count: u128, cap: u128 },

    #[error("invalid uniform cover: {0}")]
    InvalidCover(String),

    #[error("surface vectors do not span R^{dim}; the body K^p is unbounded")]
    NonSpanning { dim: usize },

    #[error("degenerate body: {0}")]
    Degenerate(String),

    #[error("Khachiyan iteration did not reach tolerance {tolerance:e} within {iterations} iterations")]
    NoConvergence { iterations: usize, tolerance: f64 },

    #[error("coincident surfaces: intersection is not a finite point set")]
    Coincident,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
