use std::path::PathBuf;

use thiserror::Error;

#[derive(Error, Debug)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Config {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Model(#[from] elapsed_neurons::Error),

    /// No periodic solution; `detail` holds the root cross-check.
    #[error("{source}\n{detail}")]
    Construction {
        source: elapsed_neurons::Error,
        detail: String,
    },

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    /// Process exit status: 2 for configuration and usage problems, 3 for
    /// numerical failures, 4 when no periodic solution can be constructed,
    /// 1 when a verification ran but did not pass.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) | CliError::Csv { .. } => 2,
            CliError::Io { .. } => 2,
            CliError::Model(e) if e.is_numerical() => 3,
            CliError::Model(e) if e.is_construction() => 4,
            CliError::Model(_) => 2,
            CliError::Construction { .. } => 4,
            CliError::Verification(_) => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        CliError::Csv {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
