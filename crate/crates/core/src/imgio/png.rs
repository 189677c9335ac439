use std::path::Path;

use image::{DynamicImage, GrayImage, ImageBuffer as RasterBuffer, Luma, RgbImage};

use crate::error::{Error, Result};
use crate::types::{DisparityMap, ImageBuffer};

/// Reads an 8-bit image. Gray inputs stay single channel, everything else is
/// converted to RGB (alpha dropped).
pub fn read_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let img = image::open(path)?;
    Ok(from_dynamic(img))
}

pub(crate) fn from_dynamic(img: DynamicImage) -> ImageBuffer {
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(g) => ImageBuffer::from_raw(w, h, 1, g.into_raw()),
        DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLumaA16(_) => {
            ImageBuffer::from_raw(w, h, 1, img.to_luma8().into_raw())
        }
        other => ImageBuffer::from_raw(w, h, 3, other.to_rgb8().into_raw()),
    }
    .expect("decoder output has consistent dimensions")
}

pub fn write_image(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let raw = img.data().to_vec();
    match img.channels() {
        1 => GrayImage::from_raw(w, h, raw)
            .expect("sizes checked by ImageBuffer")
            .save_with_format(path, image::ImageFormat::Png)?,
        _ => RgbImage::from_raw(w, h, raw)
            .expect("sizes checked by ImageBuffer")
            .save_with_format(path, image::ImageFormat::Png)?,
    }
    Ok(())
}

/// KITTI-style disparity: 16-bit gray PNG, value/256 pixels, 0 = invalid.
pub fn read_disparity_png16(path: impl AsRef<Path>) -> Result<DisparityMap> {
    match image::open(path)? {
        DynamicImage::ImageLuma16(buf) => Ok(decode_png16_values(
            buf.width() as usize,
            buf.height() as usize,
            buf.as_raw(),
        )),
        other => Err(Error::Format(format!(
            "disparity PNG must be 16-bit single channel, got {:?}",
            other.color()
        ))),
    }
}

pub(crate) fn decode_png16_values(width: usize, height: usize, raw: &[u16]) -> DisparityMap {
    let mut map = DisparityMap::new_invalid(width, height);
    for (i, &v) in raw.iter().enumerate() {
        if v != 0 {
            map.set(i % width, i / width, v as f32 / 256.0);
        }
    }
    map
}

/// Writes a KITTI-style 16-bit disparity PNG. Values are rounded to the
/// nearest 1/256 px and clamped to the format range; anything that rounds to
/// zero reads back as invalid.
pub fn write_disparity_png16(map: &DisparityMap, path: impl AsRef<Path>) -> Result<()> {
    let raw: Vec<u16> = map
        .values()
        .iter()
        .map(|&v| {
            if v.is_finite() {
                (v as f64 * 256.0).round().clamp(0.0, 65535.0) as u16
            } else {
                0
            }
        })
        .collect();
    let buf: RasterBuffer<Luma<u16>, Vec<u16>> =
        RasterBuffer::from_raw(map.width() as u32, map.height() as u32, raw)
            .expect("sizes checked by DisparityMap");
    buf.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}
