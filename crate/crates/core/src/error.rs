//! Error type shared across the workspace.

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("singular shift: z = {z} is within {margin:e} of the spectrum on the real axis")]
    SingularShift { z: Complex64, margin: f64 },

    #[error("threshold: omega = {omega} is within {margin} of a boundary-value singularity")]
    Threshold { omega: f64, margin: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("step size: {0}")]
    StepSize(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the CLI: configuration problems exit with 2,
    /// numeric problems with 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) | Error::InvalidModel(_) | Error::Domain(_) => 2,
            _ => 3,
        }
    }
}
