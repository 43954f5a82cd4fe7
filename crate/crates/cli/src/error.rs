use std::path::PathBuf;

use thiserror::Error;

/// Failures of a command, each mapped to a distinct exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("plan verification failed with {0} violation(s)")]
    Verification(usize),

    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Validation(_) | CliError::Parse { .. } => 2,
            CliError::Io { .. } => 3,
            CliError::Solver(_) => 4,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        CliError::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<cyclic_caching::Error> for CliError {
    fn from(err: cyclic_caching::Error) -> Self {
        CliError::Validation(err.to_string())
    }
}

impl From<cyclic_caching::SimError> for CliError {
    fn from(err: cyclic_caching::SimError) -> Self {
        match err {
            cyclic_caching::SimError::Config(e) => e.into(),
            solver => CliError::Solver(solver.to_string()),
        }
    }
}
