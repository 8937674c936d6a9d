use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid distribution: {0}")]
    Construction(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("non-finite entries in {0}")]
    NonFinite(String),
    #[error("degree {degree} exceeds limit {limit} (raise it with ME_KIT_MAX_DEGREE)")]
    DegreeLimit { degree: usize, limit: usize },
    #[error("imaginary residual {residual:e} exceeds tolerance for value {value:e}")]
    ImaginaryResidual { value: f64, residual: f64 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
