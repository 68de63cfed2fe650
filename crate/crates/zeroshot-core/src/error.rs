//! Crate-wide error and result types.

use std::path::Path;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by loading, validation, training, and reporting.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A file did not conform to its declared format. Carries the 1-based
    /// line number where parsing failed.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// A contract violation: mismatched dimensions, empty inputs, an
    /// invalid configuration, or inconsistent data.
    #[error("{0}")]
    Invalid(String),

    /// An underlying I/O failure, tagged with the offending path.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.display().to_string(),
            line,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid(message.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// True for errors caused by the filesystem rather than file contents.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
