use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate element {element} (signed area {area})")]
    DegenerateElement { element: usize, area: f64 },

    #[error("Arnoldi breakdown at step {step} with relative residual {residual:e}")]
    Breakdown { step: usize, residual: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
