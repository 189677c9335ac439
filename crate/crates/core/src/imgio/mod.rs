//! Readers and writers for every artifact the pipeline touches.

mod calib;
mod hints;
mod middlebury;
mod pfm;
mod png;

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub use calib::{parse_calibration, read_calibration, CalibInfo};
pub use hints::{format_hints, parse_hints, read_hints, write_hints};
pub use middlebury::{downscale_disparity, downscale_image, load_middlebury, MiddleburyPair};
pub use pfm::{decode_pfm, encode_pfm, read_pfm, write_pfm};
pub use png::{read_disparity_png16, read_image, write_disparity_png16, write_image};

fn extension(path: &Path) -> String {
    path.extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default()
}

/// Reads a disparity map, choosing the format from the extension
/// (`.pfm`, or `.png` for 16-bit KITTI encoding).
pub fn read_disparity(path: impl AsRef<Path>) -> Result<crate::DisparityMap> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "pfm" => read_pfm(path),
        "png" => read_disparity_png16(path),
        other => Err(Error::Format(format!("unknown disparity format {other:?}"))),
    }
}

pub fn write_disparity(map: &crate::DisparityMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "pfm" => write_pfm(map, path),
        "png" => write_disparity_png16(map, path),
        other => Err(Error::Format(format!("unknown disparity format {other:?}"))),
    }
}

/// Serializes `value` as pretty JSON with a trailing newline. Key order is
/// the declaration order of the serialized structs.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Format(format!("JSON encoding failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}
