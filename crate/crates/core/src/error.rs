use alloc::string::String;

/// Errors reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    /// A matrix that has to be symmetric positive definite is not. `detail`
    /// names the block and, when known, the surviving kernel direction.
    #[error("matrix is not positive definite ({block}): {detail}")]
    NotPositiveDefinite { block: String, detail: String },
    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
