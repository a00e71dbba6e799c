use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its allowed range.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The data cannot support the requested computation (zero variance,
    /// saturated sensor, empty interval, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// No peak/trough pair was found; batch-oriented callers skip the batch.
    #[error("no usable peak/trough pair")]
    NoCycle,

    /// A session file failed validation. `line` is 1-based and counts the header.
    #[error("{}{}: {message}", path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Load {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn load(path: impl Into<PathBuf>, line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Load {
            path: path.into(),
            line,
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input data rather than bad parameters.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Argument(_))
    }
}
