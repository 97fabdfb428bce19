use std::io;

/// Failure of a CLI command, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Bad usage, config or input data (exit 1).
    #[error("{0}")]
    Config(String),

    /// Gradient check failure or a non-finite loss (exit 2).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io: {0}")]
    Io(#[from] io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Numerical(_) => 2,
            RunError::Config(_) | RunError::Io(_) => 1,
        }
    }
}

impl From<svcdep_core::Error> for RunError {
    fn from(e: svcdep_core::Error) -> Self {
        if e.is_numerical() {
            RunError::Numerical(e.to_string())
        } else {
            RunError::Config(e.to_string())
        }
    }
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Config(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Config(format!("json: {e}"))
    }
}
