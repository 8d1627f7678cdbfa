use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("defective or near-defective matrix (eigenvector condition {condition:.3e})")]
    DefectiveMatrix { condition: f64 },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("root refinement did not converge (last iterate {last}, residual {residual:.3e})")]
    Refinement { last: Complex64, residual: f64 },

    #[error("root on or near the counting contour: {0}")]
    Contour(String),

    #[error("phase tracking did not resolve: {0}")]
    Resolution(String),

    #[error("M is not in the range of tau*B (least-squares residual {residual:.3e})")]
    Inconsistent { residual: f64 },

    #[error("branch solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("pairing error: {0}")]
    Pairing(String),

    #[error("method inapplicable: {0}")]
    Inapplicable(String),

    #[error("failed to parse `{key}`: {message}")]
    Parse { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
