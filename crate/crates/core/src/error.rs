use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("index {index} on line {line} outside [1, {norb}]")]
    IndexOutOfRange { line: usize, index: usize, norb: usize },

    #[error("conflicting values for {what}: {first} vs {second}")]
    Inconsistent { what: String, first: f64, second: f64 },

    #[error("sector error: {0}")]
    Sector(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator exponential did not converge within {terms} terms (theta*|A| ~ {theta_norm:.3e})")]
    ExpNotConverged { terms: usize, theta_norm: f64 },

    #[error("numerical consistency check failed: {0}")]
    Numerical(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("requested {requested} states but the basis has {available}")]
    TooManyStates { requested: usize, available: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
