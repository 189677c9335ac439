//! Depth ↔ disparity conversion and epipolar correspondence on a rectified pair.

use crate::error::{Error, Result};
use crate::types::Calibration;

/// Where a reference pixel lands in the target image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub x: usize,
    pub y: usize,
    /// Target column, `x - d`; may be negative.
    pub x_prime: f64,
    /// Splatting weight `x_prime - floor(x_prime)`, in `[0, 1)`.
    pub beta: f64,
}

impl Correspondence {
    /// The target column lies left of the target image.
    pub fn out_of_target(&self) -> bool {
        self.x_prime < 0.0
    }

    pub fn floor_col(&self) -> i64 {
        self.x_prime.floor() as i64
    }
}

/// `d = b·f/z − doffs`, clamped at zero.
pub fn depth_to_disparity(z: f64, calib: &Calibration) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Domain(format!("depth must be positive and finite, got {z}")));
    }
    let d = calib.baseline * calib.focal_length_px / z - calib.disparity_offset;
    Ok(d.max(0.0))
}

/// `z = b·f/(d + doffs)`.
pub fn disparity_to_depth(d: f64, calib: &Calibration) -> Result<f64> {
    let denom = d + calib.disparity_offset;
    if !(denom > 0.0 && d.is_finite()) {
        return Err(Error::Domain(format!(
            "disparity {d} with offset {} has no finite depth",
            calib.disparity_offset
        )));
    }
    Ok(calib.baseline * calib.focal_length_px / denom)
}

/// Target column for a reference pixel; out-of-range columns are a valid
/// outcome and are reported through [`Correspondence::out_of_target`].
pub fn correspondence(x: usize, y: usize, d: f64) -> Correspondence {
    let x_prime = x as f64 - d;
    let beta = x_prime - x_prime.floor();
    Correspondence {
        x,
        y,
        x_prime,
        beta,
    }
}
