use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("format error: {0}")]
    Format(String),

    /// A value violates a documented invariant (negative disparity, bad parameter, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Inputs that are individually valid but do not fit together.
    #[error("contract error: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    /// True for failures caused by the outside world (files, malformed bytes)
    /// rather than by invariant violations.
    pub fn is_io_like(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Format(_))
    }
}

impl From<image::ImageError> for Error {
    fn from(e: image::ImageError) -> Self {
        match e {
            image::ImageError::IoError(io) => Error::Io(io),
            other => Error::Format(other.to_string()),
        }
    }
}
