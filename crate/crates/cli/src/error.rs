use qg_core::QgError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("checkpoint was written by manifest {found}, current manifest is {expected}")]
    HashMismatch { expected: String, found: String },
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Core(#[from] QgError),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
