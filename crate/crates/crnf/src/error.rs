use thiserror::Error;

/// Failures surfaced by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("structure left the parameterized neighbourhood: {0}")]
    Neighbourhood(String),
    #[error("contact preservation failed after {steps} steps (ratio {ratio:e})")]
    ContactDrift { steps: usize, ratio: f64 },
    #[error("outside contraction neighbourhood after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("contraction ratio {ratio} at step {step}")]
    NotContracting { step: usize, ratio: f64 },
    #[error("generating function is not real (imaginary mass {0:e})")]
    NotReal(f64),
    #[error("basis mismatch: file has {found}, expected {expected}")]
    BasisMismatch { expected: String, found: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
