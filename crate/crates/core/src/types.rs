use crate::error::{Error, Result};

/// Marker stored in a [`DisparityMap`] for pixels without a disparity.
pub const INVALID: f32 = f32::INFINITY;

/// Row-major 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize) -> Result<Self> {
        Self::from_raw(width, height, channels, vec![0; width * height * channels])
    }

    pub fn from_raw(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::Validation(format!(
                "unsupported channel count {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::Validation(format!(
                "buffer of {} bytes does not match {width}x{height}x{channels}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Single-channel image filled by `f(x, y)`.
    pub fn from_fn_gray(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            channels: 1,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    pub fn same_shape(&self, other: &ImageBuffer) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: u8) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    /// BT.601 luma, rounded to nearest. Gray images are returned as-is.
    pub fn to_gray(&self) -> ImageBuffer {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(3)
            .map(|p| {
                let y = 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64;
                y.round().clamp(0.0, 255.0) as u8
            })
            .collect();
        ImageBuffer {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }
}

/// Dense disparity in pixels; [`INVALID`] marks missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    values: Vec<f32>,
}

impl DisparityMap {
    pub fn new_invalid(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![INVALID; width * height],
        }
    }

    /// Builds a map, mapping every non-finite or negative value to [`INVALID`].
    pub fn from_values(width: usize, height: usize, mut values: Vec<f32>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::Validation(format!(
                "{} disparity values for a {width}x{height} map",
                values.len()
            )));
        }
        for v in values.iter_mut() {
            if !v.is_finite() || *v < 0.0 {
                *v = INVALID;
            }
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                values.push(if v.is_finite() && v >= 0.0 { v } else { INVALID });
            }
        }
        Self {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Raw value, possibly [`INVALID`].
    #[inline]
    pub fn raw(&self, x: usize, y: usize) -> f32 {
        self.values[y * self.width + x]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<f32> {
        let v = self.raw(x, y);
        (v != INVALID).then_some(v)
    }

    #[inline]
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.raw(x, y) != INVALID
    }

    /// Stores `v`, mapping non-finite or negative values to [`INVALID`].
    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.values[y * self.width + x] = if v.is_finite() && v >= 0.0 { v } else { INVALID };
    }

    pub fn invalidate(&mut self, x: usize, y: usize) {
        self.values[y * self.width + x] = INVALID;
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|v| **v != INVALID).count()
    }
}

/// Stereo calibration needed for depth ↔ disparity conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub focal_length_px: f64,
    /// Meters.
    pub baseline: f64,
    pub disparity_offset: f64,
}

impl Calibration {
    pub fn new(focal_length_px: f64, baseline: f64, disparity_offset: f64) -> Result<Self> {
        if !(focal_length_px > 0.0 && focal_length_px.is_finite()) {
            return Err(Error::Validation(format!(
                "focal length must be positive, got {focal_length_px}"
            )));
        }
        if !(baseline > 0.0 && baseline.is_finite()) {
            return Err(Error::Validation(format!(
                "baseline must be positive, got {baseline}"
            )));
        }
        if !disparity_offset.is_finite() {
            return Err(Error::Validation("disparity offset must be finite".into()));
        }
        Ok(Self {
            focal_length_px,
            baseline,
            disparity_offset,
        })
    }
}

/// A sparse disparity seed at an integer reference-image pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hint {
    pub x: usize,
    pub y: usize,
    pub d: f64,
    /// Set by the occlusion heuristic.
    pub occluded: bool,
    /// The correspondence falls left of the target image.
    pub out_of_target: bool,
}

impl Hint {
    pub fn new(x: usize, y: usize, d: f64) -> Self {
        Self {
            x,
            y,
            d,
            occluded: false,
            out_of_target: false,
        }
    }
}

/// Hints with unique pixel positions and nonnegative finite disparities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HintSet {
    entries: Vec<Hint>,
}

impl HintSet {
    pub fn new(entries: Vec<Hint>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(entries.len());
        for h in &entries {
            if !(h.d.is_finite() && h.d >= 0.0) {
                return Err(Error::Validation(format!(
                    "hint ({}, {}) has invalid disparity {}",
                    h.x, h.y, h.d
                )));
            }
            if !seen.insert((h.x, h.y)) {
                return Err(Error::Validation(format!(
                    "duplicate hint at ({}, {})",
                    h.x, h.y
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Hint] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Hint] {
        &mut self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Hint> {
        self.entries.iter()
    }

    /// Checks every hint lies inside a `width`×`height` image.
    pub fn check_bounds(&self, width: usize, height: usize) -> Result<()> {
        match self.entries.iter().find(|h| h.x >= width || h.y >= height) {
            Some(h) => Err(Error::Contract(format!(
                "hint ({}, {}) outside {width}x{height} image",
                h.x, h.y
            ))),
            None => Ok(()),
        }
    }

    /// Sorts hints by ascending (y, x).
    pub fn sort_raster(&mut self) {
        self.entries.sort_by_key(|h| (h.y, h.x));
    }
}

impl<'a> IntoIterator for &'a HintSet {
    type Item = &'a Hint;
    type IntoIter = std::slice::Iter<'a, Hint>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}
