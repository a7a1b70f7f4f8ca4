use std::path::PathBuf;

use thiserror::Error;

/// Failures of a CLI run, each tied to one exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unparsable or out-of-range configuration.
    #[error("usage error: {0}")]
    Usage(String),

    /// One or more verification checks failed.
    #[error("verification failed: {}", .0.join(", "))]
    Verification(Vec<String>),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Library(#[from] geoscatter::Error),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::File {
            path: path.into(),
            source,
        }
    }

    /// 1 for verification failures, 2 for usage errors, 3 for everything
    /// that went wrong at runtime.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::File { .. } | CliError::Library(_) => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
