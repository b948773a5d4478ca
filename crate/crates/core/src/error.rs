use std::path::PathBuf;

use thiserror::Error;

use crate::backend::BackendError;
use crate::imaging::PixelFormat;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch { left: (u32, u32), right: (u32, u32) },

    #[error("{op} does not accept {format:?} images")]
    UnsupportedFormat {
        op: &'static str,
        format: PixelFormat,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pixel buffer holds {actual} samples, expected {expected}")]
    BufferSize { expected: usize, actual: usize },

    #[error("empty mask")]
    EmptyMask,

    #[error("mask has {0} connected components, expected exactly one")]
    NotSingleComponent(usize),

    #[error("no layers: vectorization produced no foreground shapes")]
    NoLayers,

    #[error("missing panel {0}")]
    MissingPanel(&'static str),

    #[error("grid is not masked")]
    GridNotMasked,

    #[error("{kind} samples need {what} for exemplars: {}", ids.join(", "))]
    MissingRepresentation {
        kind: String,
        what: &'static str,
        ids: Vec<String>,
    },

    #[error("a style needs at least 2 exemplars, got {0}")]
    TooFewExemplars(usize),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Backend(#[from] BackendError),

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error under any stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
