use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("block structure mismatch: {0}")]
    BlockMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("operator is not positive semidefinite (eigenvalue {0:.3e} below tolerance)")]
    NotPositive(f64),

    #[error("vector is not a unit state (norm {0})")]
    NotUnit(f64),

    #[error("zero vector rejected")]
    ZeroVector,

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("majorisation violated: {0}")]
    NotMajorised(String),

    #[error("states are not convertible: {0}")]
    NotConvertible(String),

    #[error("unsupported on non-factor algebras: {0}")]
    NonFactor(String),

    #[error("side constraint violated: {0}")]
    SideViolation(String),

    #[error("invalid instrument partition: {0}")]
    InvalidPartition(String),

    #[error("numerical degeneration: {0}")]
    Degenerate(String),

    #[error("protocol output is not a pure vector state (second eigenvalue {0:.3e})")]
    MixedOutput(f64),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
