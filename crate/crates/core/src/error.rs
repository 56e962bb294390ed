use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mode mismatch: expected {expected}, found {found}")]
    ModeMismatch { expected: usize, found: usize },

    #[error("vector norm {norm:e} is too small to normalize")]
    NullVector { norm: f64 },

    #[error("operator norm {norm} exceeds 1")]
    NormBound { norm: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid splitting: {0}")]
    InvalidSplitting(String),

    #[error("invalid b-matrix: check `{check}` failed with residual {residual:e}")]
    InvalidBMatrix { check: &'static str, residual: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operator has weight outside the span it is being represented on.
    #[error("operator not supported on frame: leakage {leakage:e} above {threshold:e}")]
    Support { leakage: f64, threshold: f64 },

    #[error("outcome ({n}, {m}) has vanishing probability {probability:e}")]
    ImpossibleOutcome { n: usize, m: usize, probability: f64 },

    /// A region-local operation was requested on a splitting without regions.
    #[error("region-local operation unsupported: {0}")]
    UnsupportedRegion(String),

    /// A model invariant failed at build time.
    #[error("model invariant `{check}` violated: residual {residual:e}")]
    ModelInvariant { check: &'static str, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
