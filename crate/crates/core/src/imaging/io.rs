//! 8-bit PNG encoding. Binary rasters are stored as gray PNGs holding 0/255.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};

use crate::error::{Error, Result};

use super::raster::{PixelFormat, RasterImage};

pub fn encode_png(img: &RasterImage) -> Result<Vec<u8>> {
    let dynimg = to_dynamic(img);
    let mut buf = Cursor::new(Vec::new());
    dynimg.write_to(&mut buf, ImageFormat::Png)?;
    Ok(buf.into_inner())
}

/// Decodes a PNG. Gray sources (with or without alpha) become gray8, every
/// other layout becomes rgb8. Alpha is composited over white.
pub fn decode_png(bytes: &[u8]) -> Result<RasterImage> {
    let dynimg = image::load_from_memory_with_format(bytes, ImageFormat::Png)?;
    Ok(from_dynamic(dynimg))
}

pub fn read_png(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_png(&bytes)
}

pub fn write_png(path: impl AsRef<Path>, img: &RasterImage) -> Result<()> {
    let path = path.as_ref();
    crate::fsutil::write_atomic(path, &encode_png(img)?)
}

pub(crate) fn to_dynamic(img: &RasterImage) -> DynamicImage {
    let (w, h) = img.dimensions();
    match img.format() {
        PixelFormat::Rgb8 => DynamicImage::ImageRgb8(
            RgbImage::from_raw(w, h, img.pixels().to_vec()).expect("buffer size checked"),
        ),
        PixelFormat::Gray8 | PixelFormat::Binary => DynamicImage::ImageLuma8(
            GrayImage::from_raw(w, h, img.pixels().to_vec()).expect("buffer size checked"),
        ),
    }
}

pub(crate) fn from_dynamic(dynimg: DynamicImage) -> RasterImage {
    let (w, h) = (dynimg.width(), dynimg.height());
    let over_white = |v: u8, a: u8| -> u8 {
        let (v, a) = (v as u32, a as u32);
        ((v * a + 255 * (255 - a) + 127) / 255) as u8
    };
    match dynimg {
        DynamicImage::ImageLuma8(g) => {
            RasterImage::new(w, h, PixelFormat::Gray8, g.into_raw()).expect("gray buffer")
        }
        DynamicImage::ImageLumaA8(g) => {
            let px = g
                .into_raw()
                .chunks_exact(2)
                .map(|p| over_white(p[0], p[1]))
                .collect();
            RasterImage::new(w, h, PixelFormat::Gray8, px).expect("gray buffer")
        }
        DynamicImage::ImageRgb8(c) => {
            RasterImage::new(w, h, PixelFormat::Rgb8, c.into_raw()).expect("rgb buffer")
        }
        other if other.color().has_color() || other.color().has_alpha() => {
            let rgba = other.to_rgba8();
            let px = rgba
                .into_raw()
                .chunks_exact(4)
                .flat_map(|p| {
                    [
                        over_white(p[0], p[3]),
                        over_white(p[1], p[3]),
                        over_white(p[2], p[3]),
                    ]
                })
                .collect();
            RasterImage::new(w, h, PixelFormat::Rgb8, px).expect("rgb buffer")
        }
        other => RasterImage::new(w, h, PixelFormat::Gray8, other.to_luma8().into_raw())
            .expect("gray buffer"),
    }
}
