use thiserror::Error;

use crate::eigensolver::KleSpectrum;

/// Errors produced anywhere in the discretization and solution pipeline.
#[derive(Debug, Error)]
pub enum KleError {
    #[error("parameter {value} outside the domain [0, 1]")]
    Domain { value: f64 },

    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("singular geometry: Jacobian determinant {det:e} at parameter {point:?}")]
    SingularGeometry { point: Vec<f64>, det: f64 },

    #[error("singular matrix: zero pivot at index {pivot}")]
    SingularMatrix { pivot: usize },

    #[error("matrix is not positive definite: leading minor {minor} fails")]
    NotPositiveDefinite { minor: usize },

    #[error("problem size {size} exceeds the dense cap {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("Lanczos did not converge after {restarts} restarts (max residual {max_residual:e})")]
    NoConvergence {
        restarts: usize,
        max_residual: f64,
        best: Box<KleSpectrum>,
    },

    #[error("geometry file: {0}")]
    GeometryFormat(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, KleError>;
