//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("unknown builtin domain `{0}`")]
    UnknownDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("group action error: {0}")]
    Group(String),

    #[error("fundamental domain reduction failed: {0}")]
    Reduction(String),

    #[error("eigensolver did not converge after {iterations} iterations; worst residual {worst_residual:.3e} (target {target:.3e})")]
    SolverNonConvergence {
        iterations: usize,
        worst_residual: f64,
        target: f64,
    },

    #[error("spectrum does not cover the requested range: {0}")]
    InsufficientCoverage(String),

    #[error("eigenvalue classification is ambiguous: {0}")]
    AmbiguousClassification(String),

    #[error("partition error: {0}")]
    Partition(String),

    #[error("expression error: {0}")]
    Expr(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("file format error: {0}")]
    Format(String),
}
