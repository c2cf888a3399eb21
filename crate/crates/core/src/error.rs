use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("relative error undefined: reference has zero Frobenius norm")]
    ZeroReference,
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:.3e})")]
    EigenNonConvergence { sweeps: usize, residual: f64 },
    #[error("iterate diverged at iteration {iteration}")]
    Diverged { iteration: usize },
    #[error("schema version mismatch: expected {expected}, found {found}")]
    SchemaVersion { expected: String, found: String },
    #[error("malformed data: {0}")]
    MalformedData(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
