use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("failed to converge: {0}")]
    Convergence(String),
    #[error("singular evaluation: {0}")]
    Singular(String),
    #[error("identity check failed: {0}")]
    Identity(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("quadrature did not reach tolerance: {0}")]
    Quadrature(String),
    #[error("eigenvalues too close for the determinant oracle: {0}")]
    DegenerateEigenvalues(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("seed error: {0}")]
    Seed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
