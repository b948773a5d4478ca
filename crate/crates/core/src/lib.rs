//! Structure-first image stylisation toolkit.
//!
//! A target is reduced to a binary *hidden backbone* (skeleton plus eroded
//! masses of its simplified shapes), mapped by an analogy adapter to a
//! grayscale *abstraction proxy*, then rendered in the reference style by a
//! second adapter. Both adapters are driven through 2×2 analogy grids whose
//! bottom-right panel is inpainted by a backend.
//!
//! Data-parallel kernels use rayon when the `parallel` feature is on;
//! [`par::Parallelism::Sequential`] forces the single-threaded path.

pub mod analogy;
pub mod backend;
mod error;
pub mod eval;
pub mod fsutil;
pub mod imaging;
pub mod par;
pub mod pipeline;
pub mod representations;
pub mod synthetic;
pub mod vectorizer;

pub use error::{Error, Result};
pub use par::Parallelism;
