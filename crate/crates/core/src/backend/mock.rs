//! Deterministic in-process backend.
//!
//! Training records an adapter whose id hashes the job. Inpainting fills the
//! masked rectangle with a fixed transform of the panel directly to its left,
//! so `A | f(A)` over `B | f(B)` for any registered `f`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use super::registry::{Registry, RegistryEntry};
use super::{
    AdapterKind, AdapterRef, AdapterStatus, Backend, BackendError, Health, InpaintJob, TrainJob,
    PROTOCOL_VERSION,
};
use crate::imaging::{erode, luma, BinaryImage, RasterImage, StructuringDisk};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MockTransform {
    #[default]
    Identity,
    /// `255 − v` per channel.
    Invert,
    /// Luma `< t` → black, else white.
    Threshold(u8),
    /// Binarise at 128, erode the dark set by a disk of radius `k`.
    Erode(u32),
}

impl fmt::Display for MockTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MockTransform::Identity => f.write_str("identity"),
            MockTransform::Invert => f.write_str("invert"),
            MockTransform::Threshold(t) => write!(f, "threshold:{t}"),
            MockTransform::Erode(k) => write!(f, "erode:{k}"),
        }
    }
}

impl FromStr for MockTransform {
    type Err = BackendError;

    fn from_str(s: &str) -> Result<Self, BackendError> {
        let bad = || BackendError::permanent(format!("unknown mock transform {s:?}"));
        match s.split_once(':') {
            None => match s {
                "identity" => Ok(MockTransform::Identity),
                "invert" => Ok(MockTransform::Invert),
                _ => Err(bad()),
            },
            Some(("threshold", t)) => t.parse().map(MockTransform::Threshold).map_err(|_| bad()),
            Some(("erode", k)) => k.parse().map(MockTransform::Erode).map_err(|_| bad()),
            Some(_) => Err(bad()),
        }
    }
}

impl MockTransform {
    pub fn apply(self, img: &RasterImage) -> RasterImage {
        match self {
            MockTransform::Identity => img.clone(),
            MockTransform::Invert => img.inverted(),
            MockTransform::Threshold(t) => {
                let gray = RasterImage::from_fn_gray(img.width(), img.height(), |x, y| {
                    if luma(img.rgb_at(x, y)) < t {
                        0
                    } else {
                        255
                    }
                });
                gray.convert(img.format())
            }
            MockTransform::Erode(k) => {
                let bin = BinaryImage::from_raster(img);
                erode(&bin, StructuringDisk::new(k))
                    .to_gray8()
                    .convert(img.format())
            }
        }
    }
}

/// Mock backend. The only shared state is the append-only registry.
pub struct MockBackend {
    default_transform: MockTransform,
    registry: Mutex<Registry>,
}

impl Default for MockBackend {
    fn default() -> Self {
        Self::new(MockTransform::Identity)
    }
}

impl MockBackend {
    /// In-memory registry; adapters trained without a `transform` option
    /// get `default_transform`.
    pub fn new(default_transform: MockTransform) -> Self {
        Self {
            default_transform,
            registry: Mutex::new(Registry::in_memory()),
        }
    }

    /// Registry persisted at `path`, so adapters survive restarts.
    pub fn with_registry(default_transform: MockTransform, path: &Path) -> crate::Result<Self> {
        Ok(Self {
            default_transform,
            registry: Mutex::new(Registry::open(path)?),
        })
    }

    fn registry(&self) -> std::sync::MutexGuard<'_, Registry> {
        self.registry.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn transform_of(&self, job: &TrainJob) -> Result<MockTransform, BackendError> {
        match job.options.get("transform") {
            None => Ok(self.default_transform),
            Some(serde_json::Value::String(s)) => s.parse(),
            Some(other) => Err(BackendError::permanent(format!(
                "transform option must be a string, got {other}"
            ))),
        }
    }

    /// `mock-{kind}-{first 16 hex of sha256(job)}`.
    pub fn adapter_id(job: &TrainJob, transform: MockTransform) -> String {
        let mut h = Sha256::new();
        h.update(job.kind.as_str());
        h.update(job.config.rank.to_le_bytes());
        h.update(job.config.steps.to_le_bytes());
        h.update(transform.to_string());
        for s in &job.samples {
            let (w, hgt) = s.image.dimensions();
            h.update(w.to_le_bytes());
            h.update(hgt.to_le_bytes());
            h.update([s.image.format().samples_per_pixel() as u8]);
            h.update(s.image.pixels());
            h.update((s.prompt.len() as u64).to_le_bytes());
            h.update(s.prompt.as_bytes());
        }
        let digest = hex::encode(h.finalize());
        format!("mock-{}-{}", job.kind, &digest[..16])
    }

    fn stored_transform(entry: &RegistryEntry) -> MockTransform {
        entry
            .options
            .get("transform")
            .and_then(|v| v.as_str())
            .and_then(|s| s.parse().ok())
            .unwrap_or_default()
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

type Rect = (u32, u32, u32, u32);

/// The masked rectangle and the origin of the equally sized panel to its left.
fn source_rect(mask: &BinaryImage) -> Result<(Rect, (u32, u32)), BackendError> {
    let (x0, y0, x1, y1) = mask
        .bounding_box()
        .ok_or_else(|| BackendError::permanent("mask is empty"))?;
    let (w, h) = (x1 - x0, y1 - y0);
    if mask.count() != (w * h) as usize {
        return Err(BackendError::permanent(
            "mock backend needs a rectangular mask",
        ));
    }
    if x0 < w {
        return Err(BackendError::permanent(
            "mock backend needs a panel left of the mask",
        ));
    }
    Ok(((x0, y0, w, h), (x0 - w, y0)))
}

impl Backend for MockBackend {
    fn health(&self) -> Result<Health, BackendError> {
        Ok(Health {
            ok: true,
            version: PROTOCOL_VERSION.into(),
            capabilities: vec!["train".into(), "inpaint".into()],
        })
    }

    fn submit_train(&self, job: &TrainJob) -> Result<AdapterRef, BackendError> {
        job.validate()?;
        let transform = self.transform_of(job)?;
        let id = Self::adapter_id(job, transform);
        let mut options = job.options.clone();
        options.insert("transform".into(), transform.to_string().into());
        let entry = RegistryEntry {
            kind: job.kind,
            config: job.config,
            status: AdapterStatus::Ready,
            created_at: now(),
            options,
        };
        let mut reg = self.registry();
        reg.insert(&id, entry).map_err(|e| BackendError::Server {
            status: 500,
            message: e.to_string(),
        })?;
        Ok(reg.adapter_ref(&id).expect("just inserted"))
    }

    fn adapter(&self, id: &str) -> Result<AdapterRef, BackendError> {
        self.registry()
            .adapter_ref(id)
            .ok_or_else(|| BackendError::UnknownAdapter(id.to_owned()))
    }

    fn inpaint(&self, job: &InpaintJob) -> Result<Vec<RasterImage>, BackendError> {
        job.validate()?;
        let transform = {
            let reg = self.registry();
            let entry = reg
                .get(&job.adapter_id)
                .ok_or_else(|| BackendError::UnknownAdapter(job.adapter_id.clone()))?;
            if entry.status != AdapterStatus::Ready {
                return Err(BackendError::AdapterNotReady {
                    id: job.adapter_id.clone(),
                    status: entry.status,
                });
            }
            Self::stored_transform(entry)
        };
        let ((x, y, w, h), (sx, sy)) = source_rect(&job.mask)?;
        let src = job
            .grid
            .crop(sx, sy, w, h)
            .map_err(|e| BackendError::permanent(e.to_string()))?;
        let mut out = job.grid.clone();
        out.paste(&transform.apply(&src), x, y)
            .map_err(|e| BackendError::permanent(e.to_string()))?;
        Ok(vec![out; job.samples as usize])
    }
}

impl MockBackend {
    /// Kind of a registered adapter, if any.
    pub fn kind_of(&self, id: &str) -> Option<AdapterKind> {
        self.registry().get(id).map(|e| e.kind)
    }
}
