use crate::error::{Error, Result};

use super::raster::{PixelFormat, RasterImage, BINARY_BACKGROUND, BINARY_FOREGROUND};

/// Foreground pixel set over a `width`×`height` canvas.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl std::fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BinaryImage {}x{}", self.width, self.height)?;
        if self.width <= 64 && self.height <= 64 {
            for y in 0..self.height {
                for x in 0..self.width {
                    f.write_str(if self.get(x, y) { "#" } else { "." })?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

impl BinaryImage {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        let expected = width as usize * height as usize;
        if bits.len() != expected {
            return Err(Error::BufferSize {
                expected,
                actual: bits.len(),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Parses rows of `#` (foreground) and `.` (background). Handy in tests.
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len() as u32;
        let width = rows.first().map_or(0, |r| r.len()) as u32;
        Self::from_fn(width, height, |x, y| {
            rows[y as usize].as_bytes()[x as usize] == b'#'
        })
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

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub(crate) fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.bits
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    /// Like [`get`](Self::get) but treats out-of-canvas coordinates as background.
    #[inline]
    pub fn get_or_bg(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as u64) < self.width as u64
            && (y as u64) < self.height as u64
            && self.bits[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        let w = self.width as usize;
        self.bits[y as usize * w + x as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn foreground(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width as usize;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| ((i % w) as u32, (i / w) as u32))
    }

    fn check_dims(&self, other: &BinaryImage) -> Result<()> {
        if self.dimensions() != other.dimensions() {
            return Err(Error::DimensionMismatch {
                left: self.dimensions(),
                right: other.dimensions(),
            });
        }
        Ok(())
    }

    pub fn union(&self, other: &BinaryImage) -> Result<BinaryImage> {
        self.check_dims(other)?;
        Ok(self.zip_with(other, |a, b| a || b))
    }

    pub fn intersection(&self, other: &BinaryImage) -> Result<BinaryImage> {
        self.check_dims(other)?;
        Ok(self.zip_with(other, |a, b| a && b))
    }

    pub fn difference(&self, other: &BinaryImage) -> Result<BinaryImage> {
        self.check_dims(other)?;
        Ok(self.zip_with(other, |a, b| a && !b))
    }

    fn zip_with(&self, other: &BinaryImage, f: impl Fn(bool, bool) -> bool) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn is_subset_of(&self, other: &BinaryImage) -> bool {
        self.dimensions() == other.dimensions()
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Binary raster with foreground = 0 (black), background = 255.
    pub fn to_raster(&self) -> RasterImage {
        let pixels = self
            .bits
            .iter()
            .map(|&b| {
                if b {
                    BINARY_FOREGROUND
                } else {
                    BINARY_BACKGROUND
                }
            })
            .collect();
        RasterImage::new(self.width, self.height, PixelFormat::Binary, pixels)
            .expect("sizes agree by construction")
    }

    /// Black-on-white gray8 rendering, the storage form of backbones.
    pub fn to_gray8(&self) -> RasterImage {
        self.to_raster().to_gray8_lossless()
    }

    /// Foreground where the sample is dark (`< 128`). Binary rasters
    /// round-trip losslessly through this and [`to_raster`](Self::to_raster).
    pub fn from_raster(img: &RasterImage) -> BinaryImage {
        let (w, h) = img.dimensions();
        match img.format() {
            PixelFormat::Rgb8 => BinaryImage::from_fn(w, h, |x, y| img.gray_at(x, y) < 128),
            _ => BinaryImage {
                width: w,
                height: h,
                bits: img.pixels().iter().map(|&v| v < 128).collect(),
            },
        }
    }

    /// Bounding box `(x0, y0, x1, y1)` (exclusive max) of the foreground.
    pub fn bounding_box(&self) -> Option<(u32, u32, u32, u32)> {
        let mut bb: Option<(u32, u32, u32, u32)> = None;
        for (x, y) in self.foreground() {
            bb = Some(match bb {
                None => (x, y, x + 1, y + 1),
                Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x + 1), y1.max(y + 1)),
            });
        }
        bb
    }

    pub fn crop(&self, x: u32, y: u32, w: u32, h: u32) -> BinaryImage {
        BinaryImage::from_fn(w, h, |xx, yy| {
            self.get_or_bg((x + xx) as i64, (y + yy) as i64)
        })
    }
}

/// Number of connected foreground components. `eight` selects
/// 8-connectivity, otherwise 4-connectivity.
pub fn count_components(img: &BinaryImage, eight: bool) -> usize {
    label_components(img, eight).1
}

/// Labels connected components in scanline order of their first pixel.
/// Background pixels get `u32::MAX`.
pub fn label_components(img: &BinaryImage, eight: bool) -> (Vec<u32>, usize) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut labels = vec![u32::MAX; img.bits().len()];
    let mut next = 0u32;
    let mut stack = Vec::new();
    const N4: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    const N8: [(i64, i64); 8] = [
        (1, 0),
        (-1, 0),
        (0, 1),
        (0, -1),
        (1, 1),
        (1, -1),
        (-1, 1),
        (-1, -1),
    ];
    let offsets: &[(i64, i64)] = if eight { &N8 } else { &N4 };
    for start in 0..labels.len() {
        if !img.bits()[start] || labels[start] != u32::MAX {
            continue;
        }
        labels[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = ((i as i64) % w, (i as i64) / w);
            for &(dx, dy) in offsets {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let j = (ny * w + nx) as usize;
                if img.bits()[j] && labels[j] == u32::MAX {
                    labels[j] = next;
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    (labels, next as usize)
}
