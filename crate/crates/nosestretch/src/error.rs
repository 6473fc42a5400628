use std::fmt;

/// Failure of one command, carrying its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Precondition or validity failure; exit code 2.
    #[error("{0}")]
    Validity(String),
    /// I/O or schema failure; exit code 3.
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validity(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn io(context: impl fmt::Display, err: impl fmt::Display) -> CliError {
        CliError::Io(format!("{context}: {err}"))
    }
}

impl From<nosestretch_core::Error> for CliError {
    fn from(e: nosestretch_core::Error) -> Self {
        CliError::Validity(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
