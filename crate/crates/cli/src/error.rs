use solvcirc_core::Error as CoreError;
use thiserror::Error;

/// Failures mapped onto the process exit-code contract.
#[derive(Debug, Error)]
pub enum CliError {
    /// Exit 1: the run completed but a quantitative check failed.
    #[error("check failed: {0}")]
    Failure(String),
    /// Exit 2: the configuration cannot be used.
    #[error("configuration error: {0}")]
    Config(String),
    /// Exit 3: the requested run exceeds the capacity cap.
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Capacity(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Capacity { .. } => CliError::Capacity(e.to_string()),
            CoreError::Drift(_) | CoreError::Dominance(_) | CoreError::Positivity(_) => {
                CliError::Failure(e.to_string())
            }
            CoreError::Dimension(_)
            | CoreError::Argument(_)
            | CoreError::Shape(_)
            | CoreError::Precondition { .. }
            | CoreError::Degenerate(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e.to_string()))
    }
}

pub type CliResult<T> = Result<T, CliError>;
