//! Hidden backbones and abstraction proxies.
//!
//! A backbone is the union of the Zhang–Suen skeleton and the disk-eroded
//! residual of the rearmost vector layers, rendered black with a white
//! outline. A reference proxy is the exemplar's flat-colour vectorisation
//! in grayscale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{
    erode_with, skeletonize_with, to_grayscale, BinaryImage, PixelFormat, RasterImage,
    StructuringDisk,
};
use crate::par::Parallelism;
use crate::vectorizer::{
    rasterize_layers, vectorize_with, LayerSet, RenderMode, VectorizeParams, REFERENCE_SIDE,
};

pub const PIPELINE_VERSION: &str = concat!("ais-core/", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Target,
    Reference,
}

/// Enough to recompute an artifact: what went in and with which settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub stage: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_path: Option<String>,
    pub content_hash: String,
    pub params: serde_json::Value,
    pub pipeline_version: String,
}

impl Provenance {
    pub fn new(stage: &str, input: &RasterImage, params: &impl Serialize) -> Self {
        Self {
            stage: stage.to_owned(),
            input_path: None,
            content_hash: raster_hash(input),
            params: serde_json::to_value(params).unwrap_or(serde_json::Value::Null),
            pipeline_version: PIPELINE_VERSION.to_owned(),
        }
    }

    pub fn with_input_path(mut self, path: impl Into<String>) -> Self {
        self.input_path = Some(path.into());
        self
    }
}

/// SHA-256 over dimensions, format and samples.
pub fn raster_hash(img: &RasterImage) -> String {
    let mut bytes = Vec::with_capacity(img.pixels().len() + 16);
    bytes.extend_from_slice(&img.width().to_le_bytes());
    bytes.extend_from_slice(&img.height().to_le_bytes());
    bytes.push(img.format().samples_per_pixel() as u8);
    bytes.extend_from_slice(img.pixels());
    crate::fsutil::sha256_hex(&bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackboneParams {
    /// Rearmost layers rendered into the backbone.
    pub layer_count: u32,
    /// Disk radius in pixels; `None` scales 25 px at 1024 with the shorter side.
    pub erosion_radius: Option<u32>,
    /// White outline width; `None` scales 2 px at 1024.
    pub stroke_width: Option<u32>,
    /// Drops the eroded residuals (skeleton-only ablation).
    pub skeleton_only: bool,
    pub vectorize: VectorizeParams,
}

impl Default for BackboneParams {
    fn default() -> Self {
        Self {
            layer_count: 4,
            erosion_radius: None,
            stroke_width: None,
            skeleton_only: false,
            vectorize: VectorizeParams::default(),
        }
    }
}

impl BackboneParams {
    fn scale(width: u32, height: u32) -> f64 {
        width.min(height) as f64 / REFERENCE_SIDE
    }

    pub fn radius_for(&self, width: u32, height: u32) -> u32 {
        self.erosion_radius
            .unwrap_or_else(|| (25.0 * Self::scale(width, height)).round() as u32)
    }

    pub fn stroke_for(&self, width: u32, height: u32) -> u32 {
        self.stroke_width
            .unwrap_or_else(|| ((2.0 * Self::scale(width, height)).round() as u32).max(1))
    }

    /// Copy with every resolution-dependent value fixed for this canvas.
    pub fn resolved(&self, width: u32, height: u32) -> BackboneParams {
        let mut p = self.clone();
        p.erosion_radius = Some(self.radius_for(width, height));
        p.stroke_width = Some(self.stroke_for(width, height));
        p.vectorize.min_area = Some(self.vectorize.min_area_for(width, height));
        p
    }
}

/// Every intermediate of one backbone build.
#[derive(Debug, Clone, PartialEq)]
pub struct BackboneParts {
    pub layers: LayerSet,
    /// Binarised fill-black/stroke-white render of the selected layers.
    pub render: BinaryImage,
    pub skeleton: BinaryImage,
    /// Eroded residuals (empty for the skeleton-only ablation).
    pub residuals: BinaryImage,
    pub backbone: BinaryImage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenBackbone {
    pub image: BinaryImage,
    pub source: Provenance,
    pub role: Role,
}

impl HiddenBackbone {
    /// Black-on-white gray8, the storage form.
    pub fn to_gray8(&self) -> RasterImage {
        self.image.to_gray8()
    }
}

pub fn backbone_parts(
    img: &RasterImage,
    params: &BackboneParams,
    par: Parallelism,
) -> Result<BackboneParts> {
    let (w, h) = img.dimensions();
    let params = params.resolved(w, h);
    let layers = vectorize_with(img, &params.vectorize, par)?;
    if layers.layers.is_empty() {
        return Err(Error::NoLayers);
    }
    let rendered = rasterize_layers(
        &layers,
        0..params.layer_count,
        RenderMode::FillBlackStrokeWhite,
        params.stroke_width.unwrap_or(2),
    )?;
    let render = BinaryImage::from_raster(&rendered);
    let skeleton = skeletonize_with(&render, par);
    let residuals = if params.skeleton_only {
        BinaryImage::new(w, h)
    } else {
        erode_with(
            &render,
            StructuringDisk::new(params.erosion_radius.unwrap_or(25)),
            par,
        )
    };
    let backbone = skeleton.union(&residuals)?;
    Ok(BackboneParts {
        layers,
        render,
        skeleton,
        residuals,
        backbone,
    })
}

pub fn build_backbone(
    img: &RasterImage,
    params: &BackboneParams,
    role: Role,
) -> Result<HiddenBackbone> {
    build_backbone_with(img, params, role, Parallelism::default())
}

pub fn build_backbone_with(
    img: &RasterImage,
    params: &BackboneParams,
    role: Role,
    par: Parallelism,
) -> Result<HiddenBackbone> {
    let parts = backbone_parts(img, params, par)?;
    let (w, h) = img.dimensions();
    Ok(HiddenBackbone {
        image: parts.backbone,
        source: Provenance::new("backbone", img, &params.resolved(w, h)),
        role,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbstractionProxy {
    /// Gray8 for the standard proxy; rgb8 only for the colour ablation.
    pub image: RasterImage,
    pub source: Provenance,
    pub role: Role,
}

/// Proxy variants used by the ablations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxyMode {
    /// Flat-colour vectorisation in grayscale (the standard proxy).
    #[default]
    VectorSimplificationOnly,
    /// The original image as its own proxy.
    None,
    /// Flat-colour vectorisation kept in colour.
    Color,
}

pub fn build_reference_proxy(
    exemplar: &RasterImage,
    params: &VectorizeParams,
) -> Result<AbstractionProxy> {
    let image = ablation_proxy(exemplar, ProxyMode::VectorSimplificationOnly, params)?;
    let (w, h) = exemplar.dimensions();
    let mut resolved = params.clone();
    resolved.min_area = Some(params.min_area_for(w, h));
    Ok(AbstractionProxy {
        image,
        source: Provenance::new("proxy", exemplar, &resolved),
        role: Role::Reference,
    })
}

pub fn ablation_proxy(
    img: &RasterImage,
    mode: ProxyMode,
    params: &VectorizeParams,
) -> Result<RasterImage> {
    if mode == ProxyMode::None {
        return Ok(img.clone());
    }
    let layers = vectorize_with(img, params, Parallelism::default())?;
    if layers.layers.is_empty() {
        return Err(Error::NoLayers);
    }
    let flat = rasterize_layers(&layers, 0..u32::MAX, RenderMode::FlatColor, 0)?;
    match mode {
        ProxyMode::Color => Ok(flat),
        _ => to_grayscale(&flat),
    }
}

/// Final stylised image with its lineage.
#[derive(Debug, Clone, PartialEq)]
pub struct StylizedOutput {
    pub image: RasterImage,
    pub proxy_ref: Provenance,
    pub avat_id: Option<String>,
    pub svat_id: String,
}

impl StylizedOutput {
    pub fn new(
        image: &RasterImage,
        proxy_ref: Provenance,
        avat_id: Option<String>,
        svat_id: String,
    ) -> Self {
        Self {
            image: image.convert(PixelFormat::Rgb8),
            proxy_ref,
            avat_id,
            svat_id,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{BLACK, WHITE};

    fn square_scene(side: u32, lo: u32, hi: u32) -> RasterImage {
        RasterImage::from_fn_rgb(side, side, |x, y| {
            if (lo..hi).contains(&x) && (lo..hi).contains(&y) {
                BLACK
            } else {
                WHITE
            }
        })
    }

    #[test]
    fn blank_input_has_no_layers() {
        let blank = RasterImage::filled(128, 128, PixelFormat::Rgb8, WHITE);
        assert!(matches!(
            build_backbone(&blank, &BackboneParams::default(), Role::Target),
            Err(Error::NoLayers)
        ));
        assert!(matches!(
            build_reference_proxy(&blank, &VectorizeParams::default()),
            Err(Error::NoLayers)
        ));
    }

    #[test]
    fn scaled_defaults() {
        let p = BackboneParams::default();
        assert_eq!(p.radius_for(1024, 1024), 25);
        assert_eq!(p.stroke_for(1024, 1024), 2);
        assert_eq!(p.radius_for(512, 2048), 13);
        assert_eq!(p.stroke_for(256, 256), 1);
        assert_eq!(p.radius_for(2048, 2048), 50);
    }

    #[test]
    fn square_backbone_is_skeleton_plus_inner_square() {
        let img = square_scene(200, 50, 150);
        let params = BackboneParams {
            erosion_radius: Some(25),
            stroke_width: Some(2),
            ..Default::default()
        };
        let parts = backbone_parts(&img, &params, Parallelism::default()).unwrap();
        assert!(!parts.residuals.is_empty());
        assert_eq!(
            parts.backbone,
            parts.skeleton.union(&parts.residuals).unwrap()
        );
        // stroke eats one pixel on the inside: 98×98 black, eroded by 25 → 48×48
        assert_eq!(parts.render.count(), 98 * 98);
        assert_eq!(parts.residuals.bounding_box(), Some((76, 76, 124, 124)));
    }

    #[test]
    fn proxy_of_gray_exemplar_is_flat_rendering() {
        let img = RasterImage::from_fn_gray(64, 64, |x, _| {
            if x < 20 {
                255
            } else if x < 40 {
                90
            } else {
                30
            }
        });
        let proxy = build_reference_proxy(&img, &VectorizeParams::default()).unwrap();
        assert_eq!(proxy.image.format(), PixelFormat::Gray8);
        assert_eq!(proxy.image, img);
    }

    #[test]
    fn none_mode_is_passthrough() {
        let img = square_scene(40, 5, 30);
        assert_eq!(
            ablation_proxy(&img, ProxyMode::None, &VectorizeParams::default()).unwrap(),
            img
        );
    }
}
