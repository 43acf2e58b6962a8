use std::path::PathBuf;

/// Failure of a command, split by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input values or options (exit status 2).
    #[error("{0}")]
    Validation(String),
    /// Unreadable input or unwritable output (exit status 3).
    #[error("{path}: {source}")]
    Io {
        /// File involved.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io { .. } => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<mfdp_core::Error> for CliError {
    fn from(e: mfdp_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}
