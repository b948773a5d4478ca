//! Simplified layered vectorisation.
//!
//! `quantize → extract regions → order → trace → simplify`. Regions of
//! consistent colour become flat-colour polygons ordered back to front.
//! Layer order uses area as a stand-in for occlusion depth: the largest
//! shape is rearmost. The region owning most of the canvas border is the
//! background; it sets the canvas colour and is not emitted as a layer.

pub mod contour;
pub mod quantize;
pub mod regions;
pub mod render;
pub mod simplify;
pub mod svg;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::imaging::{RasterImage, Rgb, WHITE};
use crate::par::{self, Parallelism};

pub use contour::{trace_contour, Contour, Point, VectorPath};
pub use quantize::{quantize_colors, quantize_colors_with, PaletteImage, QuantizeOptions};
pub use regions::{extract_regions, Region, RegionMap};
pub use render::{rasterize_layers, RenderMode};
pub use simplify::simplify_path;

/// Resolution the default parameters are calibrated for.
pub const REFERENCE_SIDE: f64 = 1024.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorLayer {
    pub outer: VectorPath,
    pub holes: Vec<VectorPath>,
    pub fill: Rgb,
    /// 0 is rearmost.
    pub z: u32,
    /// Pixel count of the source region.
    pub area: u32,
}

impl VectorLayer {
    pub fn paths(&self) -> impl Iterator<Item = &VectorPath> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }
}

/// Layers of one image, back to front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSet {
    pub width: u32,
    pub height: u32,
    pub background: Rgb,
    pub layers: Vec<VectorLayer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VectorizeParams {
    pub colors: usize,
    /// Absolute minimum region area in pixels. `None` scales 64 px at
    /// 1024² by canvas area.
    pub min_area: Option<u32>,
    pub simplify_eps: f64,
    pub refine_iterations: usize,
}

impl Default for VectorizeParams {
    fn default() -> Self {
        Self {
            colors: 8,
            min_area: None,
            simplify_eps: 1.5,
            refine_iterations: 4,
        }
    }
}

impl VectorizeParams {
    pub fn min_area_for(&self, width: u32, height: u32) -> u32 {
        self.min_area.unwrap_or_else(|| {
            let scale = width as f64 * height as f64 / (REFERENCE_SIDE * REFERENCE_SIDE);
            ((64.0 * scale).round() as u32).max(1)
        })
    }
}

/// Orders regions back to front by descending area (ties: scanline order of
/// the topmost-leftmost pixel) and returns the ordering as region ids.
pub fn layer_order(regions: &[Region], ids: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut ids: Vec<usize> = ids.into_iter().collect();
    ids.sort_by(|&a, &b| {
        regions[b]
            .area
            .cmp(&regions[a].area)
            .then(regions[a].first_pixel.cmp(&regions[b].first_pixel))
    });
    ids
}

/// Traces, simplifies and z-orders the given regions.
pub fn order_layers(
    map: &RegionMap,
    ids: impl IntoIterator<Item = usize>,
    eps: f64,
    par: Parallelism,
) -> Result<Vec<VectorLayer>> {
    let order = layer_order(&map.regions, ids);
    let traced = par::map(par, &order, |&id| -> Result<VectorLayer> {
        let (mask, (ox, oy)) = map.cropped_mask(id);
        let c = trace_contour(&mask)?;
        let place = |p: &VectorPath| simplify_path(&p.translated(ox as f64, oy as f64), eps);
        let r = &map.regions[id];
        Ok(VectorLayer {
            outer: place(&c.outer),
            holes: c.holes.iter().map(place).collect(),
            fill: r.fill,
            z: 0,
            area: r.area,
        })
    });
    traced
        .into_iter()
        .enumerate()
        .map(|(z, l)| l.map(|l| VectorLayer { z: z as u32, ..l }))
        .collect()
}

pub fn vectorize(img: &RasterImage, params: &VectorizeParams) -> Result<LayerSet> {
    vectorize_with(img, params, Parallelism::default())
}

pub fn vectorize_with(
    img: &RasterImage,
    params: &VectorizeParams,
    par: Parallelism,
) -> Result<LayerSet> {
    let (w, h) = img.dimensions();
    let pimg = quantize_colors_with(
        img,
        QuantizeOptions {
            colors: params.colors,
            refine_iterations: params.refine_iterations,
        },
        par,
    )?;
    let map = extract_regions(&pimg, params.min_area_for(w, h))?;
    let background = map.border_dominant();
    let layers = order_layers(
        &map,
        (0..map.len()).filter(|&i| Some(i) != background),
        params.simplify_eps,
        par,
    )?;
    Ok(LayerSet {
        width: w,
        height: h,
        background: background.map_or(WHITE, |b| map.regions[b].fill),
        layers,
    })
}
