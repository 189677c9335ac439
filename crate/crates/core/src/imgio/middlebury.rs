use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{DisparityMap, ImageBuffer};

use super::{read_calibration, read_image, read_pfm, CalibInfo};

/// One Middlebury 2014 training scene (`im0.png`, `im1.png`, `disp0.pfm`,
/// `calib.txt`), optionally downscaled.
#[derive(Debug, Clone)]
pub struct MiddleburyPair {
    pub name: String,
    pub left: ImageBuffer,
    pub right: ImageBuffer,
    pub gt: DisparityMap,
    pub calib: CalibInfo,
}

/// Loads a scene directory and shrinks it by the integer factor `scale`
/// (4 gives quarter resolution). Disparities and `ndisp` are divided by it.
pub fn load_middlebury(dir: impl AsRef<Path>, scale: usize) -> Result<MiddleburyPair> {
    let dir = dir.as_ref();
    if scale == 0 {
        return Err(Error::Validation("downscale factor must be ≥ 1".into()));
    }
    let left = read_image(dir.join("im0.png"))?;
    let right = read_image(dir.join("im1.png"))?;
    let gt = read_pfm(dir.join("disp0.pfm"))?;
    let mut calib = read_calibration(dir.join("calib.txt"))?;
    if !left.same_shape(&right) || gt.width() != left.width() || gt.height() != left.height() {
        return Err(Error::Contract(format!(
            "scene {} has inconsistent image/ground-truth sizes",
            dir.display()
        )));
    }
    calib.ndisp = calib.ndisp.map(|n| n.div_ceil(scale));
    Ok(MiddleburyPair {
        name: dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        left: downscale_image(&left, scale),
        right: downscale_image(&right, scale),
        gt: downscale_disparity(&gt, scale),
        calib,
    })
}

/// Box-filter downsampling by an integer factor; trailing partial blocks are cropped.
pub fn downscale_image(img: &ImageBuffer, scale: usize) -> ImageBuffer {
    if scale == 1 {
        return img.clone();
    }
    let (w, h, c) = (img.width() / scale, img.height() / scale, img.channels());
    let area = (scale * scale) as u32;
    let mut data = Vec::with_capacity(w * h * c);
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let mut sum = 0u32;
                for dy in 0..scale {
                    for dx in 0..scale {
                        sum += img.get(x * scale + dx, y * scale + dy, ch) as u32;
                    }
                }
                data.push(((sum + area / 2) / area) as u8);
            }
        }
    }
    ImageBuffer::from_raw(w, h, c, data).expect("consistent size")
}

/// Nearest sampling at block centers, disparities divided by the factor.
pub fn downscale_disparity(map: &DisparityMap, scale: usize) -> DisparityMap {
    if scale == 1 {
        return map.clone();
    }
    let (w, h) = (map.width() / scale, map.height() / scale);
    DisparityMap::from_fn(w, h, |x, y| {
        let v = map.raw(x * scale + scale / 2, y * scale + scale / 2);
        v / scale as f32
    })
}
