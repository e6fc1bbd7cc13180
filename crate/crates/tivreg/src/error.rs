//! Crate-wide error type.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point cloud has {count} points, at least {required} required")]
    TooFewPoints { count: usize, required: usize },

    #[error("no TIVs remain after deleting the top {deleted} of {available}")]
    EmptySelection { deleted: usize, available: usize },

    #[error("grid bounds degenerate on axis {axis} (extent {extent})")]
    DegenerateBounds { axis: usize, extent: f64 },

    #[error("{what} is empty")]
    EmptyInput { what: &'static str },

    #[error("point sets have zero joint extent, cannot normalize")]
    NormalizationDegenerate,

    #[error("no correspondences to evaluate")]
    NoCorrespondences,

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("{path}: unsupported format: {msg}")]
    UnsupportedFormat { path: PathBuf, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Exit code the CLI maps this error to: 2 for I/O and file-format
    /// problems, 1 for algorithmic failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::UnsupportedFormat { .. } | Error::Io { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
