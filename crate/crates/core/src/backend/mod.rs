//! Backend protocol for adapter training and masked inpainting.
//!
//! [`Backend`] is the raw transport; [`BackendClient`] layers retries,
//! health/version checks, adapter polling and the unmasked-pixel
//! postcondition on top of any implementation.

pub mod client;
pub mod fixtures;
#[cfg(feature = "http")]
pub mod http;
pub mod mock;
pub mod protocol;
pub mod registry;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{BinaryImage, RasterImage};

pub use client::{BackendClient, RetryPolicy};
#[cfg(feature = "http")]
pub use http::HttpBackend;
pub use mock::{MockBackend, MockTransform};
pub use registry::{Registry, RegistryEntry};

pub const PROTOCOL_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),

    #[error("backend returned {status}: {message}")]
    Server { status: u16, message: String },

    #[error("rejected by backend: {message}{}", sample_index.map(|i| format!(" (sample {i})")).unwrap_or_default())]
    Permanent {
        message: String,
        sample_index: Option<usize>,
    },

    #[error("unknown adapter {0}")]
    UnknownAdapter(String),

    #[error("adapter {id} is {status}")]
    AdapterNotReady { id: String, status: AdapterStatus },

    #[error("backend speaks protocol version {found}, expected {expected}")]
    VersionMismatch { expected: String, found: String },

    #[error("backend changed {changed} unmasked pixels")]
    UnmaskedPixelsChanged { changed: usize },

    #[error("adapter {id} is {found}, expected {expected}")]
    KindMismatch {
        id: String,
        expected: AdapterKind,
        found: AdapterKind,
    },

    #[error("invalid backend response: {0}")]
    InvalidResponse(String),

    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted {
        attempts: u32,
        last: Box<BackendError>,
    },
}

impl BackendError {
    pub fn permanent(message: impl Into<String>) -> Self {
        BackendError::Permanent {
            message: message.into(),
            sample_index: None,
        }
    }

    /// Transport failures and 5xx answers.
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            BackendError::Transport(_) | BackendError::Server { .. }
        )
    }

    /// True when the failure came from reaching the backend at all.
    pub fn is_transport(&self) -> bool {
        self.is_retryable() || matches!(self, BackendError::RetriesExhausted { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdapterKind {
    Avat,
    Svat,
    Asvat,
}

impl AdapterKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AdapterKind::Avat => "avat",
            AdapterKind::Svat => "svat",
            AdapterKind::Asvat => "asvat",
        }
    }
}

impl fmt::Display for AdapterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AdapterKind {
    type Err = BackendError;

    fn from_str(s: &str) -> Result<Self, BackendError> {
        match s {
            "avat" => Ok(AdapterKind::Avat),
            "svat" => Ok(AdapterKind::Svat),
            "asvat" => Ok(AdapterKind::Asvat),
            other => Err(BackendError::permanent(format!(
                "unknown adapter kind {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdapterConfig {
    pub rank: u32,
    pub steps: u32,
}

impl Default for AdapterConfig {
    fn default() -> Self {
        Self {
            rank: 16,
            steps: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdapterStatus {
    Pending,
    Ready,
    Failed,
}

impl fmt::Display for AdapterStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdapterStatus::Pending => "pending",
            AdapterStatus::Ready => "ready",
            AdapterStatus::Failed => "failed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterRef {
    pub id: String,
    pub kind: AdapterKind,
    pub config: AdapterConfig,
    pub status: AdapterStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainSample {
    pub image: RasterImage,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainJob {
    pub kind: AdapterKind,
    pub config: AdapterConfig,
    pub samples: Vec<TrainSample>,
    /// Backend-specific knobs passed through verbatim (the mock reads
    /// `transform`).
    pub options: serde_json::Map<String, serde_json::Value>,
}

impl TrainJob {
    pub fn new(kind: AdapterKind, samples: Vec<TrainSample>) -> Self {
        Self {
            kind,
            config: AdapterConfig::default(),
            samples,
            options: Default::default(),
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        let first = self
            .samples
            .first()
            .ok_or_else(|| BackendError::permanent("train job has no samples"))?;
        let dims = first.image.dimensions();
        for (i, s) in self.samples.iter().enumerate() {
            if s.image.dimensions() != dims {
                return Err(BackendError::Permanent {
                    message: format!(
                        "sample canvas is {:?}, first sample is {dims:?}",
                        s.image.dimensions()
                    ),
                    sample_index: Some(i),
                });
            }
            if s.prompt.is_empty() {
                return Err(BackendError::Permanent {
                    message: "empty prompt".into(),
                    sample_index: Some(i),
                });
            }
        }
        if self.config.rank == 0 || self.config.steps == 0 {
            return Err(BackendError::permanent("rank and steps must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InpaintJob {
    pub grid: RasterImage,
    /// Foreground = pixels to generate.
    pub mask: BinaryImage,
    pub prompt: String,
    pub adapter_id: String,
    pub seed: u64,
    pub samples: u32,
}

impl InpaintJob {
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.mask.dimensions() != self.grid.dimensions() {
            return Err(BackendError::permanent(format!(
                "mask is {}x{}, grid is {:?}",
                self.mask.width(),
                self.mask.height(),
                self.grid.dimensions()
            )));
        }
        if self.mask.is_empty() {
            return Err(BackendError::permanent("mask is empty"));
        }
        if self.samples == 0 {
            return Err(BackendError::permanent("samples must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub ok: bool,
    pub version: String,
    pub capabilities: Vec<String>,
}

/// Raw backend operations; implementations must be callable concurrently.
pub trait Backend: Send + Sync {
    fn health(&self) -> Result<Health, BackendError>;
    fn submit_train(&self, job: &TrainJob) -> Result<AdapterRef, BackendError>;
    fn adapter(&self, id: &str) -> Result<AdapterRef, BackendError>;
    /// Completed canvases, one per requested sample.
    fn inpaint(&self, job: &InpaintJob) -> Result<Vec<RasterImage>, BackendError>;
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn health(&self) -> Result<Health, BackendError> {
        (**self).health()
    }
    fn submit_train(&self, job: &TrainJob) -> Result<AdapterRef, BackendError> {
        (**self).submit_train(job)
    }
    fn adapter(&self, id: &str) -> Result<AdapterRef, BackendError> {
        (**self).adapter(id)
    }
    fn inpaint(&self, job: &InpaintJob) -> Result<Vec<RasterImage>, BackendError> {
        (**self).inpaint(job)
    }
}
