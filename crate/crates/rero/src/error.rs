//! Error types shared by all modules.

use thiserror::Error;

/// Errors produced by bound evaluation, calibration and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A required configuration field is missing or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// Vector dimensions do not match.
    #[error("shape error: {0}")]
    Shape(String),

    /// The reconstruction estimator is undefined for the given inputs.
    #[error("reconstruction undefined: {0}")]
    ReconstructionUndefined(String),
}

pub type Result<T> = std::result::Result<T, Error>;
