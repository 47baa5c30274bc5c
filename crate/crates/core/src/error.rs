use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Torus parameters violate one of the admissibility constraints.
    #[error("constraint violation: {0}")]
    Constraint(String),

    /// The adaptive integrator could not make progress.
    #[error("integration failure at x = {x}: step size {step:e} underflowed")]
    IntegrationFailure { x: f64, step: f64 },

    /// An operation was called on a problem with the wrong boundary mode.
    #[error("boundary mode mismatch: expected {expected}")]
    ModeMismatch { expected: &'static str },

    /// A same-parity discriminant zero could not be separated into simple zeros.
    #[error("unresolved tangential discriminant zero near lambda = {lambda}")]
    Tangency { lambda: f64 },

    /// The supplied value is not an eigenvalue of the problem.
    #[error("lambda = {lambda} is not an eigenvalue (residual {residual:e})")]
    NotAnEigenvalue { lambda: f64, residual: f64 },

    /// The spectrum does not cover what the caller needs.
    #[error("incomplete spectrum: {0}")]
    Incomplete(String),

    /// A numerical validation check did not hold.
    #[error("validation failure: {0}")]
    Validation(String),

    /// Bad caller input that is not a torus constraint.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {field}: {message}")]
    Parse {
        path: String,
        line: usize,
        field: String,
        message: String,
    },

    #[error("report schema: {0}")]
    Schema(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
