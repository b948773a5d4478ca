//! Scanline rasterisation of vector layers.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{BinaryImage, PixelFormat, RasterImage, Rgb, BLACK, WHITE};

use super::contour::{Point, VectorPath};
use super::{LayerSet, VectorLayer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderMode {
    /// Each layer in its fill colour over the set's background colour (rgb8).
    FlatColor,
    /// Each layer filled black, its boundary overdrawn by a white stroke (gray8).
    FillBlackStrokeWhite,
}

/// Calls `f(x, y)` for every pixel whose centre lies inside `paths` under
/// the even-odd rule.
pub fn fill_even_odd<'a>(
    paths: impl IntoIterator<Item = &'a VectorPath>,
    width: u32,
    height: u32,
    mut f: impl FnMut(u32, u32),
) {
    let mut edges: Vec<(Point, Point)> = Vec::new();
    for p in paths {
        let n = p.points.len();
        if n < 2 {
            continue;
        }
        for i in 0..n {
            let (a, b) = (p.points[i], p.points[(i + 1) % n]);
            if a.y != b.y {
                edges.push((a, b));
            }
        }
    }
    if edges.is_empty() {
        return;
    }
    let ymin = edges
        .iter()
        .map(|e| e.0.y.min(e.1.y))
        .fold(f64::INFINITY, f64::min);
    let ymax = edges
        .iter()
        .map(|e| e.0.y.max(e.1.y))
        .fold(f64::NEG_INFINITY, f64::max);
    let row_lo = (ymin - 0.5).ceil().max(0.0) as u32;
    let row_hi = ((ymax - 0.5).ceil().max(0.0) as u32).min(height);
    let mut xs: Vec<f64> = Vec::new();
    for y in row_lo..row_hi {
        let yc = y as f64 + 0.5;
        xs.clear();
        for &(a, b) in &edges {
            if (a.y <= yc) != (b.y <= yc) {
                xs.push(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            // pixel x is inside when x + 0.5 ∈ [x0, x1)
            let lo = (pair[0] - 0.5).ceil().max(0.0);
            let hi = (pair[1] - 0.5).ceil().min(width as f64);
            let mut x = lo;
            while x < hi {
                f(x as u32, y);
                x += 1.0;
            }
        }
    }
}

/// Distance from `p` to segment `ab`.
fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.x + t * dx, a.y + t * dy);
    ((p.x - cx).powi(2) + (p.y - cy).powi(2)).sqrt()
}

/// Calls `f` for every pixel whose centre lies within `width / 2` of the
/// path outline. A stroke of even width `w` covers `w / 2` pixels on each
/// side of a pixel-edge boundary.
pub fn stroke_paths<'a>(
    paths: impl IntoIterator<Item = &'a VectorPath>,
    stroke: u32,
    canvas_w: u32,
    canvas_h: u32,
    mut f: impl FnMut(u32, u32),
) {
    if stroke == 0 {
        return;
    }
    let half = stroke as f64 / 2.0;
    for p in paths {
        let n = p.points.len();
        let segs = if p.closed { n } else { n.saturating_sub(1) };
        for i in 0..segs {
            let (a, b) = (p.points[i], p.points[(i + 1) % n]);
            let x0 = ((a.x.min(b.x) - half - 0.5).floor().max(0.0)) as u32;
            let y0 = ((a.y.min(b.y) - half - 0.5).floor().max(0.0)) as u32;
            let x1 = ((a.x.max(b.x) + half).ceil().max(0.0) as u32).min(canvas_w);
            let y1 = ((a.y.max(b.y) + half).ceil().max(0.0) as u32).min(canvas_h);
            for y in y0..y1 {
                for x in x0..x1 {
                    let c = Point::new(x as f64 + 0.5, y as f64 + 0.5);
                    if segment_distance(c, a, b) <= half {
                        f(x, y);
                    }
                }
            }
        }
    }
}

/// Rasterises a single layer's fill as a mask.
pub fn layer_mask(layer: &VectorLayer, width: u32, height: u32) -> BinaryImage {
    let mut m = BinaryImage::new(width, height);
    fill_even_odd(layer.paths(), width, height, |x, y| m.set(x, y, true));
    m
}

/// Paints the layers with `z` in `selection`, back to front.
pub fn rasterize_layers(
    set: &LayerSet,
    selection: Range<u32>,
    mode: RenderMode,
    stroke_width: u32,
) -> Result<RasterImage> {
    let chosen: Vec<&VectorLayer> = set
        .layers
        .iter()
        .filter(|l| selection.contains(&l.z))
        .collect();
    if chosen.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "layer selection {selection:?} matches none of {} layers",
            set.layers.len()
        )));
    }
    let mut ordered = chosen;
    ordered.sort_by_key(|l| l.z);
    let (w, h) = (set.width, set.height);
    Ok(match mode {
        RenderMode::FlatColor => {
            let mut canvas = RasterImage::filled(w, h, PixelFormat::Rgb8, set.background);
            for layer in ordered {
                paint(&mut canvas, layer, layer.fill);
            }
            canvas
        }
        RenderMode::FillBlackStrokeWhite => {
            let mut canvas = RasterImage::filled(w, h, PixelFormat::Gray8, WHITE);
            for layer in ordered {
                paint(&mut canvas, layer, BLACK);
                stroke_paths(layer.paths(), stroke_width, w, h, |x, y| {
                    canvas.put_rgb(x, y, WHITE)
                });
            }
            canvas
        }
    })
}

fn paint(canvas: &mut RasterImage, layer: &VectorLayer, color: Rgb) {
    let (w, h) = canvas.dimensions();
    fill_even_odd(layer.paths(), w, h, |x, y| canvas.put_rgb(x, y, color));
}
