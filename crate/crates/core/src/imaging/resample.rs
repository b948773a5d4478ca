//! Resizing helpers needed by the grid composer.

use image::imageops::{self, FilterType};

use super::io::{from_dynamic, to_dynamic};
use super::raster::{PixelFormat, RasterImage, Rgb, WHITE};

/// Bilinear resize to exactly `w`×`h`. Same-size input is returned as is.
pub fn resize_bilinear(img: &RasterImage, w: u32, h: u32) -> RasterImage {
    if img.dimensions() == (w, h) {
        return img.clone();
    }
    let format = img.format();
    let resized = match to_dynamic(img) {
        image::DynamicImage::ImageRgb8(buf) => {
            image::DynamicImage::ImageRgb8(imageops::resize(&buf, w, h, FilterType::Triangle))
        }
        other => image::DynamicImage::ImageLuma8(imageops::resize(
            &other.to_luma8(),
            w,
            h,
            FilterType::Triangle,
        )),
    };
    let out = from_dynamic(resized);
    match format {
        // resampling a mask yields intermediate grays; keep it gray
        PixelFormat::Binary => out,
        _ => out.convert(format),
    }
}

/// Fits `img` inside a `side`×`side` square preserving aspect ratio,
/// padding with `pad`. The scaled image is centred (offsets rounded down).
pub fn letterbox(img: &RasterImage, side: u32, pad: Rgb) -> RasterImage {
    let (w, h) = img.dimensions();
    if (w, h) == (side, side) {
        return img.clone();
    }
    let longest = w.max(h).max(1) as u64;
    let nw = ((w as u64 * side as u64 + longest / 2) / longest).clamp(1, side as u64) as u32;
    let nh = ((h as u64 * side as u64 + longest / 2) / longest).clamp(1, side as u64) as u32;
    let scaled = resize_bilinear(img, nw, nh);
    let format = match scaled.format() {
        PixelFormat::Binary => PixelFormat::Gray8,
        f => f,
    };
    let mut canvas = RasterImage::filled(side, side, format, pad);
    canvas
        .paste(&scaled, (side - nw) / 2, (side - nh) / 2)
        .expect("scaled image fits");
    canvas
}

/// Pads to a square of side `max(w, h)` without resampling.
pub fn pad_to_square(img: &RasterImage, pad: Rgb) -> RasterImage {
    let (w, h) = img.dimensions();
    if w == h {
        return img.clone();
    }
    let side = w.max(h);
    let mut canvas = RasterImage::filled(side, side, img.format(), pad);
    canvas
        .paste(img, (side - w) / 2, (side - h) / 2)
        .expect("fits by construction");
    canvas
}

/// Square letterbox at the image's own longest side (no resampling).
pub fn square_target(img: &RasterImage) -> RasterImage {
    pad_to_square(img, WHITE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_size_is_untouched() {
        let img = RasterImage::from_fn_rgb(8, 8, |x, y| [x as u8, y as u8, 0]);
        assert_eq!(letterbox(&img, 8, WHITE), img);
        assert_eq!(resize_bilinear(&img, 8, 8), img);
    }

    #[test]
    fn wide_image_is_padded_top_and_bottom() {
        let img = RasterImage::filled(20, 10, PixelFormat::Rgb8, [0, 0, 0]);
        let lb = letterbox(&img, 10, WHITE);
        assert_eq!(lb.dimensions(), (10, 10));
        assert_eq!(lb.rgb_at(5, 0), WHITE);
        assert_eq!(lb.rgb_at(5, 5), [0, 0, 0]);
        assert_eq!(lb.rgb_at(5, 9), WHITE);
    }

    #[test]
    fn downsample_of_uniform_is_uniform() {
        let img = RasterImage::filled(64, 64, PixelFormat::Gray8, [90, 90, 90]);
        let small = resize_bilinear(&img, 16, 16);
        assert!(small.pixels().iter().all(|&v| v == 90));
    }

    #[test]
    fn pad_to_square_keeps_pixels() {
        let img = RasterImage::from_fn_gray(4, 2, |x, y| (x + 10 * y) as u8);
        let sq = pad_to_square(&img, WHITE);
        assert_eq!(sq.dimensions(), (4, 4));
        assert_eq!(sq.crop(0, 1, 4, 2).unwrap(), img);
    }
}
