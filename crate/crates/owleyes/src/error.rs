//! Crate-wide error type and the process exit codes the CLI maps it to.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor or parameter shapes do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A value outside its documented domain (bad label index, zero-size image, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A computation produced or would produce non-finite values.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Malformed input text (hierarchy JSON, app-graph JSON, manifest lines).
    #[error("parse error: {0}")]
    Parse(String),

    /// Structurally valid input that violates a documented constraint.
    #[error("validation error: {0}")]
    Validation(String),

    /// No eligible widget for the requested issue category.
    #[error("no injection candidate: {0}")]
    NoCandidate(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("checkpoint magic mismatch: expected \"OWLE\", found {found:?}")]
    CheckpointMagic { found: [u8; 4] },

    #[error("unsupported checkpoint version {found}, expected {expected}")]
    CheckpointVersion { found: u32, expected: u32 },

    #[error("checkpoint truncated: {0}")]
    CheckpointTruncated(String),

    #[error("checkpoint metadata: {0}")]
    CheckpointMetadata(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn image(path: impl Into<PathBuf>, source: image::ImageError) -> Self {
        Error::Image { path: path.into(), source }
    }

    /// Process exit code for the CLI: 0 ok, 2 usage, 3 IO, 4 format/validation,
    /// 5 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) => 2,
            Error::Io { .. } | Error::Image { .. } => 3,
            Error::Dimension(_)
            | Error::Parse(_)
            | Error::Validation(_)
            | Error::NoCandidate(_)
            | Error::CheckpointMagic { .. }
            | Error::CheckpointVersion { .. }
            | Error::CheckpointTruncated(_)
            | Error::CheckpointMetadata(_) => 4,
            Error::Numeric(_) => 5,
        }
    }
}
