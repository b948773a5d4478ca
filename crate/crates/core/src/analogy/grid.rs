use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::resample::letterbox;
use crate::imaging::{BinaryImage, PixelFormat, RasterImage, WHITE};

/// Grey level filling the panel the backend has to generate.
pub const MASK_FILL: u8 = 128;

pub const MIN_PANEL_SIZE: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// `A | A′` over `B | B′`.
    TwoByTwo,
    /// A single `A | A′` row (layout ablation).
    OneByTwo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrant {
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [
        Quadrant::TopLeft,
        Quadrant::TopRight,
        Quadrant::BottomLeft,
        Quadrant::BottomRight,
    ];

    fn cell(self) -> (u32, u32) {
        match self {
            Quadrant::TopLeft => (0, 0),
            Quadrant::TopRight => (1, 0),
            Quadrant::BottomLeft => (0, 1),
            Quadrant::BottomRight => (1, 1),
        }
    }
}

/// Panels to compose. `b_prime = None` leaves the bottom-right panel masked.
#[derive(Debug, Clone, Default)]
pub struct GridPanels {
    pub a: Option<RasterImage>,
    pub a_prime: Option<RasterImage>,
    pub b: Option<RasterImage>,
    pub b_prime: Option<RasterImage>,
}

impl GridPanels {
    pub fn new(a: RasterImage, a_prime: RasterImage, b: RasterImage) -> Self {
        Self {
            a: Some(a),
            a_prime: Some(a_prime),
            b: Some(b),
            b_prime: None,
        }
    }

    pub fn complete(
        a: RasterImage,
        a_prime: RasterImage,
        b: RasterImage,
        b_prime: RasterImage,
    ) -> Self {
        Self {
            b_prime: Some(b_prime),
            ..Self::new(a, a_prime, b)
        }
    }
}

/// Seamless panel composite. In a masked grid the last panel (bottom-right,
/// or right for a 1×2 row) is uniform [`MASK_FILL`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogyGrid {
    canvas: RasterImage,
    panel_size: u32,
    layout: Layout,
    masked: bool,
}

impl AnalogyGrid {
    pub fn canvas(&self) -> &RasterImage {
        &self.canvas
    }

    pub fn into_canvas(self) -> RasterImage {
        self.canvas
    }

    pub fn panel_size(&self) -> u32 {
        self.panel_size
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn is_masked(&self) -> bool {
        self.masked
    }

    /// Rebuilds grid metadata for a bare canvas: square canvases are 2×2,
    /// 2:1 canvases are 1×2.
    pub fn from_canvas(canvas: RasterImage, masked: bool) -> Result<Self> {
        let (w, h) = canvas.dimensions();
        let (layout, panel) = if w == h && w % 2 == 0 {
            (Layout::TwoByTwo, w / 2)
        } else if w == 2 * h {
            (Layout::OneByTwo, h)
        } else {
            return Err(Error::InvalidParameter(format!(
                "{w}x{h} is not an analogy grid canvas"
            )));
        };
        Ok(Self {
            canvas,
            panel_size: panel,
            layout,
            masked,
        })
    }

    /// Replaces the canvas (e.g. with a backend's completed image).
    pub fn with_canvas(&self, canvas: RasterImage) -> Result<Self> {
        if canvas.dimensions() != self.canvas.dimensions() {
            return Err(Error::DimensionMismatch {
                left: self.canvas.dimensions(),
                right: canvas.dimensions(),
            });
        }
        Ok(Self {
            canvas: canvas.convert(self.canvas.format()),
            masked: false,
            ..self.clone()
        })
    }

    /// Pixel rectangle `(x, y, w, h)` of the generated panel.
    pub fn target_rect(&self) -> (u32, u32, u32, u32) {
        let p = self.panel_size;
        match self.layout {
            Layout::TwoByTwo => (p, p, p, p),
            Layout::OneByTwo => (p, 0, p, p),
        }
    }
}

fn fit_panel(img: &RasterImage, panel_size: u32) -> RasterImage {
    let img = match img.format() {
        PixelFormat::Binary => img.to_gray8_lossless(),
        _ => img.clone(),
    };
    letterbox(&img, panel_size, WHITE)
}

fn canvas_format(panels: &[&RasterImage]) -> PixelFormat {
    if panels.iter().any(|p| p.format() == PixelFormat::Rgb8) {
        PixelFormat::Rgb8
    } else {
        PixelFormat::Gray8
    }
}

fn check_panel_size(panel_size: u32) -> Result<()> {
    if panel_size < MIN_PANEL_SIZE {
        return Err(Error::InvalidParameter(format!(
            "panel size {panel_size} is below {MIN_PANEL_SIZE}"
        )));
    }
    Ok(())
}

/// Places `A`, `A′`, `B` and `B′` (or the mask fill) on a `2p`×`2p` canvas.
/// Panels are letterboxed onto white squares of side `p`; panels already
/// `p`×`p` are copied without resampling.
pub fn compose_grid(panels: &GridPanels, panel_size: u32) -> Result<AnalogyGrid> {
    check_panel_size(panel_size)?;
    let a = panels.a.as_ref().ok_or(Error::MissingPanel("A"))?;
    let a_prime = panels.a_prime.as_ref().ok_or(Error::MissingPanel("A'"))?;
    let b = panels.b.as_ref().ok_or(Error::MissingPanel("B"))?;
    let mut present = vec![a, a_prime, b];
    present.extend(panels.b_prime.as_ref());
    let format = canvas_format(&present);

    let p = panel_size;
    let mut canvas = RasterImage::filled(2 * p, 2 * p, format, WHITE);
    for (img, q) in [
        (a, Quadrant::TopLeft),
        (a_prime, Quadrant::TopRight),
        (b, Quadrant::BottomLeft),
    ] {
        let (cx, cy) = q.cell();
        canvas.paste(&fit_panel(img, p), cx * p, cy * p)?;
    }
    match &panels.b_prime {
        Some(bp) => canvas.paste(&fit_panel(bp, p), p, p)?,
        None => canvas.fill_rect(p, p, p, p, [MASK_FILL; 3]),
    }
    Ok(AnalogyGrid {
        canvas,
        panel_size: p,
        layout: Layout::TwoByTwo,
        masked: panels.b_prime.is_none(),
    })
}

/// Single-row `A | A′` composite on a `2p`×`p` canvas; `A′ = None` masks it.
pub fn compose_row(
    a: &RasterImage,
    a_prime: Option<&RasterImage>,
    panel_size: u32,
) -> Result<AnalogyGrid> {
    check_panel_size(panel_size)?;
    let mut present = vec![a];
    present.extend(a_prime);
    let p = panel_size;
    let mut canvas = RasterImage::filled(2 * p, p, canvas_format(&present), WHITE);
    canvas.paste(&fit_panel(a, p), 0, 0)?;
    match a_prime {
        Some(ap) => canvas.paste(&fit_panel(ap, p), p, 0)?,
        None => canvas.fill_rect(p, 0, p, p, [MASK_FILL; 3]),
    }
    Ok(AnalogyGrid {
        canvas,
        panel_size: p,
        layout: Layout::OneByTwo,
        masked: a_prime.is_none(),
    })
}

/// Mask covering exactly the panel to generate.
pub fn inference_mask(grid: &AnalogyGrid) -> Result<BinaryImage> {
    if !grid.masked {
        return Err(Error::GridNotMasked);
    }
    let (rx, ry, _, _) = grid.target_rect();
    let (w, h) = grid.canvas.dimensions();
    Ok(BinaryImage::from_fn(w, h, |x, y| x >= rx && y >= ry))
}

/// Exact crop of one panel. 1×2 grids only have top panels.
pub fn extract_panel(grid: &AnalogyGrid, which: Quadrant) -> Result<RasterImage> {
    let (cx, cy) = which.cell();
    if grid.layout == Layout::OneByTwo && cy == 1 {
        return Err(Error::InvalidParameter(format!(
            "a 1x2 grid has no {which:?} panel"
        )));
    }
    let p = grid.panel_size;
    grid.canvas.crop(cx * p, cy * p, p, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solid(color: [u8; 3], side: u32) -> RasterImage {
        RasterImage::filled(side, side, PixelFormat::Rgb8, color)
    }

    #[test]
    fn missing_panels_are_errors() {
        let img = solid([1, 2, 3], 64);
        let mut panels = GridPanels::new(img.clone(), img.clone(), img.clone());
        panels.a_prime = None;
        assert!(matches!(
            compose_grid(&panels, 64),
            Err(Error::MissingPanel("A'"))
        ));
        panels.a_prime = Some(img);
        assert!(compose_grid(&panels, 32).is_err());
    }

    #[test]
    fn distinct_solid_panels_extract_their_colors() {
        let cols = [[255, 0, 0], [0, 255, 0], [0, 0, 255], [9, 9, 9]];
        let g = compose_grid(
            &GridPanels::complete(
                solid(cols[0], 64),
                solid(cols[1], 64),
                solid(cols[2], 64),
                solid(cols[3], 64),
            ),
            64,
        )
        .unwrap();
        assert!(!g.is_masked());
        for (q, c) in Quadrant::ALL.iter().zip(cols) {
            assert_eq!(extract_panel(&g, *q).unwrap(), solid(c, 64));
        }
        assert!(matches!(inference_mask(&g), Err(Error::GridNotMasked)));
    }

    #[test]
    fn masked_panel_is_mid_gray() {
        let img = solid([10, 20, 30], 100);
        let g = compose_grid(&GridPanels::new(img.clone(), img.clone(), img), 64).unwrap();
        let br = extract_panel(&g, Quadrant::BottomRight).unwrap();
        assert!(br.pixels().iter().all(|&v| v == MASK_FILL));
        let m = inference_mask(&g).unwrap();
        assert_eq!(m.count(), 64 * 64);
        assert!(m.get(64, 64) && !m.get(63, 64) && !m.get(64, 63));
    }

    #[test]
    fn gray_panels_make_gray_canvas() {
        let g8 = RasterImage::filled(64, 64, PixelFormat::Gray8, [50, 50, 50]);
        let g = compose_grid(&GridPanels::new(g8.clone(), g8.clone(), g8), 64).unwrap();
        assert_eq!(g.canvas().format(), PixelFormat::Gray8);
    }

    #[test]
    fn row_layout() {
        let img = solid([1, 1, 1], 64);
        let g = compose_row(&img, Some(&img), 512).unwrap();
        assert_eq!(g.canvas().dimensions(), (1024, 512));
        assert!(extract_panel(&g, Quadrant::BottomLeft).is_err());
        let masked = compose_row(&img, None, 64).unwrap();
        assert_eq!(inference_mask(&masked).unwrap().count(), 64 * 64);
    }
}
