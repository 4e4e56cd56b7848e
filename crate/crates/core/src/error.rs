use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular to working precision (reciprocal condition {rcond:e})")]
    Singular { rcond: f64 },

    #[error("matrix is not positive definite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is not Hermitian (relative residual {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (residual {0:e})")]
    NotUnitary(f64),

    #[error("matrix has a non-finite entry")]
    NonFinite,

    #[error("point leaves the domain: {0}")]
    DomainExit(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sampler could not produce a member: {0}")]
    SamplerStarvation(String),

    #[error("origin is not in the domain at level {0}")]
    OriginNotInDomain(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),
}
