use std::path::Path;

use thiserror::Error;

/// Failure classes of a run, each with its own exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical degeneracy: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Parameter problems found while validating the run are config errors;
/// anything raised later by the numerics aborts the run as degenerate.
pub fn config(e: dismet::Error) -> CliError {
    CliError::Config(e.to_string())
}

pub fn numerical(e: dismet::Error) -> CliError {
    CliError::Numerical(e.to_string())
}

pub type CliResult<T> = Result<T, CliError>;
