use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sample layout of a [`RasterImage`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PixelFormat {
    Rgb8,
    Gray8,
    /// One sample per pixel restricted to {0, 255}; 0 (black) is foreground.
    Binary,
}

impl PixelFormat {
    pub fn samples_per_pixel(self) -> usize {
        match self {
            PixelFormat::Rgb8 => 3,
            PixelFormat::Gray8 | PixelFormat::Binary => 1,
        }
    }
}

pub type Rgb = [u8; 3];

pub const WHITE: Rgb = [255, 255, 255];
pub const BLACK: Rgb = [0, 0, 0];

/// Sample value marking a foreground pixel in binary rasters.
pub const BINARY_FOREGROUND: u8 = 0;
pub const BINARY_BACKGROUND: u8 = 255;

/// Row-major 8-bit image. The universal carrier for panels, masks and
/// intermediate renders.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RasterImage {
    width: u32,
    height: u32,
    format: PixelFormat,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RasterImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("format", &self.format)
            .finish_non_exhaustive()
    }
}

impl RasterImage {
    pub fn new(width: u32, height: u32, format: PixelFormat, pixels: Vec<u8>) -> Result<Self> {
        let expected = width as usize * height as usize * format.samples_per_pixel();
        if pixels.len() != expected {
            return Err(Error::BufferSize {
                expected,
                actual: pixels.len(),
            });
        }
        if format == PixelFormat::Binary
            && pixels
                .iter()
                .any(|&v| v != BINARY_FOREGROUND && v != BINARY_BACKGROUND)
        {
            return Err(Error::InvalidParameter(
                "binary rasters only hold the samples 0 and 255".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            format,
            pixels,
        })
    }

    /// Image with every pixel set to `color` (converted to `format`).
    pub fn filled(width: u32, height: u32, format: PixelFormat, color: Rgb) -> Self {
        let n = width as usize * height as usize;
        let pixels = match format {
            PixelFormat::Rgb8 => color.repeat(n),
            PixelFormat::Gray8 => vec![luma(color); n],
            PixelFormat::Binary => {
                let v = if luma(color) < 128 {
                    BINARY_FOREGROUND
                } else {
                    BINARY_BACKGROUND
                };
                vec![v; n]
            }
        };
        Self {
            width,
            height,
            format,
            pixels,
        }
    }

    pub fn from_fn_rgb(width: u32, height: u32, f: impl Fn(u32, u32) -> Rgb) -> Self {
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        Self {
            width,
            height,
            format: PixelFormat::Rgb8,
            pixels,
        }
    }

    pub fn from_fn_gray(width: u32, height: u32, f: impl Fn(u32, u32) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            format: PixelFormat::Gray8,
            pixels,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn format(&self) -> PixelFormat {
        self.format
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.format.samples_per_pixel()
    }

    /// Pixel value widened to rgb.
    pub fn rgb_at(&self, x: u32, y: u32) -> Rgb {
        let i = self.offset(x, y);
        match self.format {
            PixelFormat::Rgb8 => [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]],
            _ => [self.pixels[i]; 3],
        }
    }

    /// Raw sample for single-channel formats, luma for rgb.
    pub fn gray_at(&self, x: u32, y: u32) -> u8 {
        match self.format {
            PixelFormat::Rgb8 => luma(self.rgb_at(x, y)),
            _ => self.pixels[self.offset(x, y)],
        }
    }

    pub fn put_rgb(&mut self, x: u32, y: u32, color: Rgb) {
        let i = self.offset(x, y);
        match self.format {
            PixelFormat::Rgb8 => self.pixels[i..i + 3].copy_from_slice(&color),
            PixelFormat::Gray8 => self.pixels[i] = luma(color),
            PixelFormat::Binary => {
                self.pixels[i] = if luma(color) < 128 {
                    BINARY_FOREGROUND
                } else {
                    BINARY_BACKGROUND
                }
            }
        }
    }

    /// Converts to rgb8 by replicating single-channel samples.
    pub fn to_rgb8(&self) -> RasterImage {
        if self.format == PixelFormat::Rgb8 {
            return self.clone();
        }
        let pixels = self.pixels.iter().flat_map(|&v| [v, v, v]).collect();
        RasterImage {
            width: self.width,
            height: self.height,
            format: PixelFormat::Rgb8,
            pixels,
        }
    }

    /// Reinterprets a binary raster as gray8 with the same sample values.
    /// Rgb input is converted with [`to_grayscale`].
    pub fn to_gray8_lossless(&self) -> RasterImage {
        match self.format {
            PixelFormat::Gray8 => self.clone(),
            PixelFormat::Binary => RasterImage {
                format: PixelFormat::Gray8,
                ..self.clone()
            },
            PixelFormat::Rgb8 => to_grayscale(self).expect("rgb is accepted"),
        }
    }

    /// Converts to `format` (rgb ⇄ gray via luma, binary via the 128 threshold).
    pub fn convert(&self, format: PixelFormat) -> RasterImage {
        match (self.format, format) {
            (a, b) if a == b => self.clone(),
            (_, PixelFormat::Rgb8) => self.to_rgb8(),
            (_, PixelFormat::Gray8) => self.to_gray8_lossless(),
            (_, PixelFormat::Binary) => {
                let gray = self.to_gray8_lossless();
                let pixels = gray
                    .pixels
                    .iter()
                    .map(|&v| {
                        if v < 128 {
                            BINARY_FOREGROUND
                        } else {
                            BINARY_BACKGROUND
                        }
                    })
                    .collect();
                RasterImage {
                    format: PixelFormat::Binary,
                    pixels,
                    ..gray
                }
            }
        }
    }

    /// Exact copy of the `w`×`h` window whose top-left corner is (`x`, `y`).
    pub fn crop(&self, x: u32, y: u32, w: u32, h: u32) -> Result<RasterImage> {
        if x.checked_add(w).is_none_or(|r| r > self.width)
            || y.checked_add(h).is_none_or(|b| b > self.height)
        {
            return Err(Error::InvalidParameter(format!(
                "crop window {w}x{h}+{x}+{y} exceeds {}x{}",
                self.width, self.height
            )));
        }
        let spp = self.format.samples_per_pixel();
        let mut pixels = Vec::with_capacity(w as usize * h as usize * spp);
        for row in y..y + h {
            let start = self.offset(x, row);
            pixels.extend_from_slice(&self.pixels[start..start + w as usize * spp]);
        }
        Ok(RasterImage {
            width: w,
            height: h,
            format: self.format,
            pixels,
        })
    }

    /// Copies `src` into `self` with its top-left corner at (`x`, `y`).
    /// `src` is converted to this image's format first.
    pub fn paste(&mut self, src: &RasterImage, x: u32, y: u32) -> Result<()> {
        if x + src.width > self.width || y + src.height > self.height {
            return Err(Error::InvalidParameter(format!(
                "{}x{} at ({x},{y}) does not fit in {}x{}",
                src.width, src.height, self.width, self.height
            )));
        }
        let src = src.convert(self.format);
        let spp = self.format.samples_per_pixel();
        let row_len = src.width as usize * spp;
        for row in 0..src.height {
            let dst = self.offset(x, y + row);
            let s = row as usize * row_len;
            self.pixels[dst..dst + row_len].copy_from_slice(&src.pixels[s..s + row_len]);
        }
        Ok(())
    }

    /// Fills a rectangle with `color`.
    pub fn fill_rect(&mut self, x: u32, y: u32, w: u32, h: u32, color: Rgb) {
        for yy in y..(y + h).min(self.height) {
            for xx in x..(x + w).min(self.width) {
                self.put_rgb(xx, yy, color);
            }
        }
    }

    /// Per-sample `255 - v`.
    pub fn inverted(&self) -> RasterImage {
        RasterImage {
            pixels: self.pixels.iter().map(|&v| 255 - v).collect(),
            ..self.clone()
        }
    }

    /// Number of distinct pixel colors.
    pub fn distinct_colors(&self) -> std::collections::BTreeSet<Rgb> {
        let mut set = std::collections::BTreeSet::new();
        for y in 0..self.height {
            for x in 0..self.width {
                set.insert(self.rgb_at(x, y));
            }
        }
        set
    }
}

/// Rec. 601 luma with half-up rounding, in integer arithmetic.
pub fn luma(c: Rgb) -> u8 {
    let v = 299 * c[0] as u32 + 587 * c[1] as u32 + 114 * c[2] as u32;
    ((v + 500) / 1000) as u8
}

/// Rec. 601 grayscale conversion. Gray input is returned unchanged; binary
/// input is rejected so callers decide explicitly how to rasterize masks.
pub fn to_grayscale(img: &RasterImage) -> Result<RasterImage> {
    match img.format {
        PixelFormat::Gray8 => Ok(img.clone()),
        PixelFormat::Binary => Err(Error::UnsupportedFormat {
            op: "to_grayscale",
            format: PixelFormat::Binary,
        }),
        PixelFormat::Rgb8 => Ok(RasterImage {
            width: img.width,
            height: img.height,
            format: PixelFormat::Gray8,
            pixels: img
                .pixels
                .chunks_exact(3)
                .map(|p| luma([p[0], p[1], p[2]]))
                .collect(),
        }),
    }
}
