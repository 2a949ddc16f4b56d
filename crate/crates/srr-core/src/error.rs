//! Error type shared across the crate.

use thiserror::Error;

/// Errors surfaced by geometry, region, solver, and construction routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A point index lies outside `1..=2^k - 1`.
    #[error("point index {index} out of range 1..={max} for k = {k}")]
    PointOutOfRange { index: u32, k: usize, max: u32 },

    /// An operation was asked to run above its documented size limit.
    #[error("{operation} supports k <= {limit}, got k = {k}")]
    LimitExceeded {
        operation: &'static str,
        limit: usize,
        k: usize,
    },

    /// Vector lengths or variable counts disagree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A parameter violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A stated precondition on the inputs does not hold.
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// Structured input (JSON or text) failed validation; names the field.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Branch-and-bound exhausted its node budget before proving optimality.
    #[error("node limit {limit} exceeded before branch and bound converged")]
    NodeLimitExceeded { limit: u64 },

    /// An internally produced witness failed its own re-verification.
    #[error("internal verification failed: {0}")]
    Verification(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
