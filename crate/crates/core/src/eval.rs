//! Structural comparison of binary masks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{count_components, BinaryImage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralMetrics {
    pub backbone_iou: f64,
    /// Difference in 8-connected component counts.
    pub component_delta: usize,
    /// Difference in foreground fraction.
    pub fg_ratio_delta: f64,
}

/// `|a∩b| / |a∪b|`, 1.0 when both are empty.
pub fn iou(a: &BinaryImage, b: &BinaryImage) -> Result<f64> {
    check_dims(a, b)?;
    let (mut inter, mut uni) = (0usize, 0usize);
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        inter += (x && y) as usize;
        uni += (x || y) as usize;
    }
    Ok(if uni == 0 {
        1.0
    } else {
        inter as f64 / uni as f64
    })
}

fn check_dims(a: &BinaryImage, b: &BinaryImage) -> Result<()> {
    if a.dimensions() != b.dimensions() {
        return Err(Error::DimensionMismatch {
            left: a.dimensions(),
            right: b.dimensions(),
        });
    }
    Ok(())
}

pub fn eval_structural(a: &BinaryImage, b: &BinaryImage) -> Result<StructuralMetrics> {
    let backbone_iou = iou(a, b)?;
    let area = a.bits().len().max(1) as f64;
    Ok(StructuralMetrics {
        backbone_iou,
        component_delta: count_components(a, true).abs_diff(count_components(b, true)),
        fg_ratio_delta: (a.count() as f64 / area - b.count() as f64 / area).abs(),
    })
}
