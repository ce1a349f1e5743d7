use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alpha must lie in [1e-4, 1], got {0}")]
    InvalidAlpha(f64),

    #[error("state dimension must be positive")]
    ZeroDimension,

    #[error(
        "matrix is not positive semi-definite (Cholesky failed after {retries} jitter retries)"
    )]
    NotPsd { retries: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("model has no linear {0} form")]
    MissingLinearForm(&'static str),

    #[error("innovation covariance is singular (condition estimate {condition:e})")]
    SingularInnovation { condition: f64 },

    #[error("block at ({x}, {y}) displaced by ({p}, {q}) falls outside the frame")]
    OutOfBounds { x: i64, y: i64, p: i64, q: i64 },

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("tracker needs at least one initial detection")]
    EmptyDetections,

    #[error("length mismatch: estimated {estimated}, truth {truth}")]
    LengthMismatch { estimated: usize, truth: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
