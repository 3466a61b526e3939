use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConicError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("problem data contains NaN or infinity")]
    NonFinite,
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("invalid problem dump: {0}")]
    Dump(String),
}
