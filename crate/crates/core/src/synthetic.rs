//! Deterministic synthetic scenes for demos, benches and tests. Shapes are
//! defined in unit coordinates and sampled at pixel centres, so the same
//! scene can be rendered at any resolution.

use crate::imaging::{RasterImage, Rgb, WHITE};

type Shape = fn(f64, f64) -> bool;

fn disk(x: f64, y: f64, cx: f64, cy: f64, r: f64) -> bool {
    (x - cx).powi(2) + (y - cy).powi(2) <= r * r
}

fn rect(x: f64, y: f64, x0: f64, y0: f64, x1: f64, y1: f64) -> bool {
    x >= x0 && x < x1 && y >= y0 && y < y1
}

const INK: Rgb = [20, 20, 20];
const RED: Rgb = [200, 40, 40];
const BLUE: Rgb = [40, 70, 190];
const GREEN: Rgb = [40, 160, 70];
const GOLD: Rgb = [230, 180, 40];

/// Painted back to front over white.
struct Scene {
    name: &'static str,
    layers: &'static [(Rgb, Shape)],
}

const SCENES: &[Scene] = &[
    Scene {
        name: "square",
        layers: &[(INK, |x, y| rect(x, y, 0.25, 0.25, 0.75, 0.75))],
    },
    Scene {
        name: "disk",
        layers: &[(INK, |x, y| disk(x, y, 0.5, 0.5, 0.3))],
    },
    Scene {
        name: "ring",
        layers: &[(BLUE, |x, y| {
            disk(x, y, 0.5, 0.5, 0.35) && !disk(x, y, 0.5, 0.5, 0.18)
        })],
    },
    Scene {
        name: "two_disks",
        layers: &[
            (RED, |x, y| disk(x, y, 0.33, 0.4, 0.2)),
            (BLUE, |x, y| disk(x, y, 0.68, 0.62, 0.16)),
        ],
    },
    Scene {
        name: "bars",
        layers: &[
            (INK, |x, y| rect(x, y, 0.15, 0.2, 0.85, 0.23)),
            (INK, |x, y| rect(x, y, 0.15, 0.5, 0.85, 0.53)),
            (INK, |x, y| rect(x, y, 0.48, 0.6, 0.51, 0.9)),
        ],
    },
    Scene {
        name: "ell",
        layers: &[(GREEN, |x, y| {
            rect(x, y, 0.2, 0.15, 0.4, 0.85) || rect(x, y, 0.2, 0.65, 0.8, 0.85)
        })],
    },
    Scene {
        name: "nested",
        layers: &[
            (BLUE, |x, y| rect(x, y, 0.1, 0.1, 0.9, 0.9)),
            (GOLD, |x, y| rect(x, y, 0.3, 0.3, 0.7, 0.7)),
            (RED, |x, y| rect(x, y, 0.45, 0.45, 0.55, 0.55)),
        ],
    },
    Scene {
        name: "triangle",
        layers: &[(RED, |x, y| {
            (0.2..0.8).contains(&y) && (x - 0.5).abs() <= (y - 0.2) * 0.6
        })],
    },
    Scene {
        name: "cross",
        layers: &[(INK, |x, y| {
            rect(x, y, 0.42, 0.1, 0.58, 0.9) || rect(x, y, 0.1, 0.42, 0.9, 0.58)
        })],
    },
    Scene {
        name: "overlap",
        layers: &[
            (GOLD, |x, y| {
                ((x - 0.45) / 0.35).powi(2) + ((y - 0.5) / 0.22).powi(2) <= 1.0
            }),
            (GREEN, |x, y| rect(x, y, 0.55, 0.2, 0.85, 0.7)),
        ],
    },
    Scene {
        name: "stripes",
        layers: &[(BLUE, |x, y| {
            rect(x, y, 0.1, 0.1, 0.9, 0.9) && ((y * 10.0) as i64) % 2 == 0
        })],
    },
    Scene {
        name: "donut_dot",
        layers: &[
            (INK, |x, y| {
                disk(x, y, 0.5, 0.5, 0.4) && !disk(x, y, 0.5, 0.5, 0.25)
            }),
            (RED, |x, y| disk(x, y, 0.5, 0.5, 0.1)),
        ],
    },
];

pub fn scene_names() -> impl Iterator<Item = &'static str> {
    SCENES.iter().map(|s| s.name)
}

/// Renders scene `name` on a `side`×`side` canvas.
pub fn scene(name: &str, side: u32) -> Option<RasterImage> {
    let s = SCENES.iter().find(|s| s.name == name)?;
    Some(RasterImage::from_fn_rgb(side, side, |px, py| {
        let (x, y) = (
            (px as f64 + 0.5) / side as f64,
            (py as f64 + 0.5) / side as f64,
        );
        s.layers
            .iter()
            .rev()
            .find(|(_, shape)| shape(x, y))
            .map(|(c, _)| *c)
            .unwrap_or(WHITE)
    }))
}

/// A horizontal and a vertical bar, `width` pixels thick and not touching,
/// on white. The max inscribed radius is `width / 2`.
pub fn thin_bars(side: u32, width: u32) -> RasterImage {
    let (lo, hi) = (side / 5, side * 4 / 5);
    let top = side / 8;
    let below = top + width + side / 16;
    RasterImage::from_fn_rgb(side, side, |x, y| {
        let horiz = (top..top + width).contains(&y) && (lo..hi).contains(&x);
        let vert = (side / 2..side / 2 + width).contains(&x) && (below..hi).contains(&y);
        if horiz || vert {
            INK
        } else {
            WHITE
        }
    })
}
