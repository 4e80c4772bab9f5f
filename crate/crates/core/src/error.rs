use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    InvalidInput(String),

    /// Bad flags or configuration, as opposed to bad data.
    #[error("{0}")]
    Usage(String),

    #[error("achromatic pixel has no defined chromaticity")]
    Achromatic,

    #[error("rendered pixel is not finite (temperature {temperature} K)")]
    NonFinite { temperature: f64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("class {0} has no training pixels")]
    EmptyClass(&'static str),

    #[error("image format: {0}")]
    Format(String),

    #[error("no images processed")]
    NoImages,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
