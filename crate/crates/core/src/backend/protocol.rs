//! JSON wire format. Images travel as base64 PNG; masks are gray PNGs with
//! 255 marking pixels to generate and 0 elsewhere.

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{
    AdapterConfig, AdapterKind, AdapterRef, AdapterStatus, Backend, BackendError, Health,
    InpaintJob, TrainJob, TrainSample,
};
use crate::imaging::io::{decode_png, encode_png};
use crate::imaging::{BinaryImage, RasterImage};

fn default_rank() -> u32 {
    AdapterConfig::default().rank
}

fn default_steps() -> u32 {
    AdapterConfig::default().steps
}

fn default_samples() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireTrainSample {
    pub image_png_b64: String,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRequest {
    pub kind: AdapterKind,
    #[serde(default = "default_rank")]
    pub rank: u32,
    #[serde(default = "default_steps")]
    pub steps: u32,
    pub samples: Vec<WireTrainSample>,
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub options: serde_json::Map<String, serde_json::Value>,
}

/// Answer to `POST /v1/train` and `GET /v1/adapters/{id}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterResponse {
    pub adapter_id: String,
    pub kind: AdapterKind,
    pub rank: u32,
    pub steps: u32,
    pub status: AdapterStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InpaintRequest {
    pub grid_png_b64: String,
    pub mask_png_b64: String,
    pub prompt: String,
    pub adapter_id: String,
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InpaintResponse {
    pub images_png_b64: Vec<String>,
    pub seed: u64,
}

pub type HealthResponse = Health;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_index: Option<usize>,
}

pub fn encode_image(img: &RasterImage) -> Result<String, BackendError> {
    let png = encode_png(img).map_err(|e| BackendError::permanent(e.to_string()))?;
    Ok(B64.encode(png))
}

pub fn decode_image(b64: &str) -> Result<RasterImage, String> {
    let bytes = B64
        .decode(b64.trim())
        .map_err(|e| format!("bad base64: {e}"))?;
    decode_png(&bytes).map_err(|e| format!("bad png: {e}"))
}

pub fn mask_to_raster(mask: &BinaryImage) -> RasterImage {
    RasterImage::from_fn_gray(mask.width(), mask.height(), |x, y| {
        if mask.get(x, y) {
            255
        } else {
            0
        }
    })
}

pub fn mask_from_raster(img: &RasterImage) -> BinaryImage {
    let gray = img.convert(crate::imaging::PixelFormat::Gray8);
    BinaryImage::from_fn(img.width(), img.height(), |x, y| gray.gray_at(x, y) >= 128)
}

impl TrainRequest {
    pub fn from_job(job: &TrainJob) -> Result<Self, BackendError> {
        Ok(Self {
            kind: job.kind,
            rank: job.config.rank,
            steps: job.config.steps,
            samples: job
                .samples
                .iter()
                .map(|s| {
                    Ok(WireTrainSample {
                        image_png_b64: encode_image(&s.image)?,
                        prompt: s.prompt.clone(),
                    })
                })
                .collect::<Result<_, BackendError>>()?,
            options: job.options.clone(),
        })
    }

    pub fn into_job(self) -> Result<TrainJob, BackendError> {
        let samples = self
            .samples
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                let image =
                    decode_image(&s.image_png_b64).map_err(|message| BackendError::Permanent {
                        message,
                        sample_index: Some(i),
                    })?;
                Ok(TrainSample {
                    image,
                    prompt: s.prompt,
                })
            })
            .collect::<Result<_, BackendError>>()?;
        Ok(TrainJob {
            kind: self.kind,
            config: AdapterConfig {
                rank: self.rank,
                steps: self.steps,
            },
            samples,
            options: self.options,
        })
    }
}

impl From<&AdapterRef> for AdapterResponse {
    fn from(a: &AdapterRef) -> Self {
        Self {
            adapter_id: a.id.clone(),
            kind: a.kind,
            rank: a.config.rank,
            steps: a.config.steps,
            status: a.status,
        }
    }
}

impl From<AdapterResponse> for AdapterRef {
    fn from(a: AdapterResponse) -> Self {
        Self {
            id: a.adapter_id,
            kind: a.kind,
            config: AdapterConfig {
                rank: a.rank,
                steps: a.steps,
            },
            status: a.status,
        }
    }
}

impl InpaintRequest {
    pub fn from_job(job: &InpaintJob) -> Result<Self, BackendError> {
        Ok(Self {
            grid_png_b64: encode_image(&job.grid)?,
            mask_png_b64: encode_image(&mask_to_raster(&job.mask))?,
            prompt: job.prompt.clone(),
            adapter_id: job.adapter_id.clone(),
            seed: job.seed,
            samples: job.samples,
        })
    }

    pub fn into_job(self) -> Result<InpaintJob, BackendError> {
        let grid = decode_image(&self.grid_png_b64)
            .map_err(|e| BackendError::permanent(format!("grid_png_b64: {e}")))?;
        let mask = decode_image(&self.mask_png_b64)
            .map_err(|e| BackendError::permanent(format!("mask_png_b64: {e}")))?;
        Ok(InpaintJob {
            grid,
            mask: mask_from_raster(&mask),
            prompt: self.prompt,
            adapter_id: self.adapter_id,
            seed: self.seed,
            samples: self.samples,
        })
    }
}

impl InpaintResponse {
    pub fn decode(&self) -> Result<Vec<RasterImage>, BackendError> {
        self.images_png_b64
            .iter()
            .map(|s| decode_image(s).map_err(BackendError::InvalidResponse))
            .collect()
    }
}

/// HTTP status and body for a failed request, as a server should answer.
pub fn error_reply(err: &BackendError) -> (u16, ErrorResponse) {
    let status = match err {
        BackendError::UnknownAdapter(_) => 404,
        BackendError::AdapterNotReady { .. } => 409,
        BackendError::Server { status, .. } => *status,
        e if e.is_transport() => 503,
        BackendError::InvalidResponse(_) => 500,
        _ => 400,
    };
    let sample_index = match err {
        BackendError::Permanent { sample_index, .. } => *sample_index,
        _ => None,
    };
    (
        status,
        ErrorResponse {
            error: err.to_string(),
            sample_index,
        },
    )
}

/// Server-side request handlers shared by every HTTP front end.
pub mod serve {
    use super::*;

    pub fn health(b: &dyn Backend) -> Result<HealthResponse, BackendError> {
        b.health()
    }

    pub fn train(b: &dyn Backend, req: TrainRequest) -> Result<AdapterResponse, BackendError> {
        let job = req.into_job()?;
        Ok(AdapterResponse::from(&b.submit_train(&job)?))
    }

    pub fn adapter(b: &dyn Backend, id: &str) -> Result<AdapterResponse, BackendError> {
        Ok(AdapterResponse::from(&b.adapter(id)?))
    }

    pub fn inpaint(b: &dyn Backend, req: InpaintRequest) -> Result<InpaintResponse, BackendError> {
        let job = req.into_job()?;
        let images = b
            .inpaint(&job)?
            .iter()
            .map(encode_image)
            .collect::<Result<_, _>>()?;
        Ok(InpaintResponse {
            images_png_b64: images,
            seed: job.seed,
        })
    }
}
