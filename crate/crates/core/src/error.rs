use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QgError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("lambda profile out of bounds: {0}")]
    LambdaOutOfBounds(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("gauge violation: {0}")]
    GaugeViolation(String),
    #[error("incompatible Neumann mean: {0}")]
    IncompatibleNeumannMean(String),
    #[error("field is not divergence free: {0}")]
    NotDivergenceFree(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("CFL violation: {0}")]
    CflViolation(String),
    #[error("solver diverged: {0}")]
    Diverged(String),
    #[error("contraction not observed: {0}")]
    ContractionNotObserved(String),
    #[error("snapshot format: {0}")]
    SnapshotFormat(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, QgError>;

impl From<std::io::Error> for QgError {
    fn from(e: std::io::Error) -> Self {
        QgError::Io(e.to_string())
    }
}
