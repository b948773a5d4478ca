//! Raster types and the binary morphology kernels used by every stage.

mod binary;
pub mod io;
pub mod morphology;
mod raster;
pub mod resample;

pub use binary::{count_components, label_components, BinaryImage};
pub use morphology::{erode, erode_with, skeletonize, skeletonize_with, union, StructuringDisk};
pub use raster::{
    luma, to_grayscale, PixelFormat, RasterImage, Rgb, BINARY_BACKGROUND, BINARY_FOREGROUND, BLACK,
    WHITE,
};
