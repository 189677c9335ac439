//! Census + semi-global matching.
//!
//! Matching cost is the Hamming distance between census descriptors. Costs
//! are aggregated along 4 or 8 straight paths with the usual SGM recurrence
//!
//! ```text
//! L(p,d) = C(p,d) + min(L(p−r,d), L(p−r,d±1) + P1, min_k L(p−r,k) + P2(p,r)) − min_k L(p−r,k)
//! ```
//!
//! where `P2(p,r) = max(P2_min, P2_γ − P2_α·|I(p) − I(p−r)|)` shrinks the
//! large-jump penalty across intensity edges. A winner-takes-all pass with
//! parabola refinement, a left-right check, a speckle filter and background
//! hole filling produce the final map.
//!
//! Row sweeps run in parallel over rows, vertical and diagonal sweeps run
//! row by row with the pixels of a row in parallel. Every path writes its
//! own buffer and paths are summed in a fixed order, so results do not
//! depend on [`Execution`].

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::par::{for_each_chunk, for_each_chunk2, Execution};
use crate::types::{DisparityMap, HintSet, ImageBuffer, INVALID};

/// Matching costs laid out as `[(y·width + x)·dmax + d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVolume {
    width: usize,
    height: usize,
    dmax: usize,
    cost: Vec<f32>,
}

impl CostVolume {
    pub fn new(width: usize, height: usize, dmax: usize, fill: f32) -> Self {
        Self {
            width,
            height,
            dmax,
            cost: vec![fill; width * height * dmax],
        }
    }

    pub fn from_fn(width: usize, height: usize, dmax: usize, mut f: impl FnMut(usize, usize, usize) -> f32) -> Self {
        let mut cost = Vec::with_capacity(width * height * dmax);
        for y in 0..height {
            for x in 0..width {
                for d in 0..dmax {
                    cost.push(f(x, y, d));
                }
            }
        }
        Self {
            width,
            height,
            dmax,
            cost,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dmax(&self) -> usize {
        self.dmax
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, d: usize) -> f32 {
        self.cost[(y * self.width + x) * self.dmax + d]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, d: usize, v: f32) {
        self.cost[(y * self.width + x) * self.dmax + d] = v;
    }

    /// All costs of one pixel.
    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let i = (y * self.width + x) * self.dmax;
        &self.cost[i..i + self.dmax]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.cost
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SgmParams {
    pub max_disp: usize,
    pub p1: f32,
    pub p2_min: f32,
    pub p2_alpha: f32,
    pub p2_gamma: f32,
    pub paths: usize,
    pub census_window: usize,
    pub lr_threshold: f32,
    pub speckle_max_diff: f32,
    pub speckle_min_region: usize,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SgmParams {
    fn default() -> Self {
        Self {
            max_disp: 192,
            p1: 11.0,
            p2_min: 17.0,
            p2_alpha: 0.5,
            p2_gamma: 35.0,
            paths: 8,
            census_window: 5,
            lr_threshold: 1.0,
            speckle_max_diff: 1.0,
            speckle_min_region: 200,
            execution: Execution::default(),
        }
    }
}

impl SgmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p1 < self.p2_min) {
            return Err(Error::Validation(format!(
                "P1 ({}) must be smaller than P2_min ({})",
                self.p1, self.p2_min
            )));
        }
        if self.paths != 4 && self.paths != 8 {
            return Err(Error::Validation(format!("paths must be 4 or 8, got {}", self.paths)));
        }
        check_census_window(self.census_window)?;
        if self.max_disp == 0 {
            return Err(Error::Validation("max disparity must be positive".into()));
        }
        Ok(())
    }

    /// `max(P2_min, P2_γ − P2_α·|ΔI|)`.
    #[inline]
    pub fn p2(&self, intensity_step: f32) -> f32 {
        (self.p2_gamma - self.p2_alpha * intensity_step.abs()).max(self.p2_min)
    }
}

fn check_census_window(window: usize) -> Result<()> {
    if window.is_multiple_of(2) || window < 3 || window * window - 1 > 64 {
        return Err(Error::Validation(format!(
            "census window must be odd and between 3 and 7, got {window}"
        )));
    }
    Ok(())
}

/// Number of bits in a census descriptor for an odd `window`.
pub fn census_bits(window: usize) -> usize {
    window * window - 1
}

/// Census descriptors: bit set where the neighbor is darker than the center.
/// Neighbors outside the image replicate the border.
pub fn census_transform(img: &ImageBuffer, window: usize, exec: Execution) -> Result<Vec<u64>> {
    check_census_window(window)?;
    let gray = img.to_gray();
    let (w, h) = (gray.width(), gray.height());
    let r = (window / 2) as i64;
    let mut out = vec![0u64; w * h];
    if w == 0 || h == 0 {
        return Ok(out);
    }
    for_each_chunk(exec, &mut out, w, |y, row| {
        for (x, desc) in row.iter_mut().enumerate() {
            let center = gray.get(x, y, 0);
            let mut bits = 0u64;
            for dy in -r..=r {
                let yy = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
                for dx in -r..=r {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let xx = (x as i64 + dx).clamp(0, w as i64 - 1) as usize;
                    bits = (bits << 1) | (gray.get(xx, yy, 0) < center) as u64;
                }
            }
            *desc = bits;
        }
    });
    Ok(out)
}

/// Hamming distance between census descriptors of `(x, y)` left and
/// `(x − d, y)` right; the full descriptor length where `x − d < 0`.
pub fn census_cost(left: &ImageBuffer, right: &ImageBuffer, dmax: usize, window: usize) -> Result<CostVolume> {
    census_cost_with(left, right, dmax, window, Execution::default())
}

pub fn census_cost_with(
    left: &ImageBuffer,
    right: &ImageBuffer,
    dmax: usize,
    window: usize,
    exec: Execution,
) -> Result<CostVolume> {
    if left.width() != right.width() || left.height() != right.height() {
        return Err(Error::Contract("stereo images differ in size".into()));
    }
    let cl = census_transform(left, window, exec)?;
    let cr = census_transform(right, window, exec)?;
    let (w, h) = (left.width(), left.height());
    let max_cost = census_bits(window) as f32;
    let mut vol = CostVolume::new(w, h, dmax, max_cost);
    if w == 0 || h == 0 || dmax == 0 {
        return Ok(vol);
    }
    for_each_chunk(exec, &mut vol.cost, w * dmax, |y, row| {
        for x in 0..w {
            let dl = cl[y * w + x];
            let px = &mut row[x * dmax..(x + 1) * dmax];
            for (d, c) in px.iter_mut().enumerate().take(x + 1) {
                *c = (dl ^ cr[y * w + x - d]).count_ones() as f32;
            }
        }
    });
    Ok(vol)
}

const DIRECTIONS: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (-1, 1),
    (1, -1),
    (-1, -1),
];

#[inline]
fn path_step(
    cost: &[f32],
    prev: &[f32],
    prev_min: f32,
    p1: f32,
    p2: f32,
    out: &mut [f32],
) -> f32 {
    let n = cost.len();
    let jump = prev_min + p2;
    let mut best = f32::INFINITY;
    for d in 0..n {
        let mut m = prev[d].min(jump);
        if d > 0 {
            m = m.min(prev[d - 1] + p1);
        }
        if d + 1 < n {
            m = m.min(prev[d + 1] + p1);
        }
        let v = cost[d] + m - prev_min;
        out[d] = v;
        best = best.min(v);
    }
    best
}

#[inline]
fn min_of(v: &[f32]) -> f32 {
    v.iter().copied().fold(f32::INFINITY, f32::min)
}

/// Aggregates one path direction into `out` (same layout as the volume).
fn aggregate_direction(vol: &CostVolume, gray: &ImageBuffer, params: &SgmParams, dir: (i64, i64), out: &mut [f32]) {
    let (w, h, dm) = (vol.width, vol.height, vol.dmax);
    let (dx, dy) = dir;
    let intensity = |x: usize, y: usize| gray.get(x, y, 0) as f32;
    let exec = params.execution;

    if dy == 0 {
        for_each_chunk(exec, out, w * dm, |y, row| {
            let xs: Box<dyn Iterator<Item = usize>> = if dx > 0 {
                Box::new(0..w)
            } else {
                Box::new((0..w).rev())
            };
            let mut prev_x: Option<usize> = None;
            let mut prev_min = 0.0;
            for x in xs {
                let cost = vol.pixel(x, y);
                match prev_x {
                    None => {
                        row[x * dm..(x + 1) * dm].copy_from_slice(cost);
                        prev_min = min_of(cost);
                    }
                    Some(px) => {
                        let p2 = params.p2(intensity(x, y) - intensity(px, y));
                        let (a, b) = if px < x {
                            let (lo, hi) = row.split_at_mut(x * dm);
                            (&lo[px * dm..(px + 1) * dm], &mut hi[..dm])
                        } else {
                            let (lo, hi) = row.split_at_mut(px * dm);
                            (&hi[..dm], &mut lo[x * dm..(x + 1) * dm])
                        };
                        prev_min = path_step(cost, a, prev_min, params.p1, p2, b);
                    }
                }
                prev_x = Some(x);
            }
        });
        return;
    }

    let ys: Vec<usize> = if dy > 0 { (0..h).collect() } else { (0..h).rev().collect() };
    let mut prev_row = vec![0f32; w * dm];
    let mut prev_mins = vec![0f32; w];
    let mut cur_row = vec![0f32; w * dm];
    let mut cur_mins = vec![0f32; w];
    const PIXELS_PER_TASK: usize = 32;
    for (step, &y) in ys.iter().enumerate() {
        let py = y as i64 - dy;
        {
            let prev_row = &prev_row;
            let prev_mins = &prev_mins;
            for_each_chunk2(
                exec,
                &mut cur_row,
                PIXELS_PER_TASK * dm,
                &mut cur_mins,
                PIXELS_PER_TASK,
                |chunk, rows, mins| {
                    for (k, (px_out, m)) in rows.chunks_mut(dm).zip(mins.iter_mut()).enumerate() {
                        let x = chunk * PIXELS_PER_TASK + k;
                        let cost = vol.pixel(x, y);
                        let sx = x as i64 - dx;
                        if step == 0 || sx < 0 || sx >= w as i64 {
                            px_out.copy_from_slice(cost);
                            *m = min_of(cost);
                        } else {
                            let sx = sx as usize;
                            let p2 = params.p2(intensity(x, y) - intensity(sx, py as usize));
                            *m = path_step(
                                cost,
                                &prev_row[sx * dm..(sx + 1) * dm],
                                prev_mins[sx],
                                params.p1,
                                p2,
                                px_out,
                            );
                        }
                    }
                },
            );
        }
        out[y * w * dm..(y + 1) * w * dm].copy_from_slice(&cur_row);
        std::mem::swap(&mut prev_row, &mut cur_row);
        std::mem::swap(&mut prev_mins, &mut cur_mins);
    }
}

/// Sums the path costs over all configured directions.
pub fn sgm_aggregate(vol: &CostVolume, left: &ImageBuffer, params: &SgmParams) -> Result<CostVolume> {
    params.validate()?;
    if left.width() != vol.width || left.height() != vol.height {
        return Err(Error::Contract("guide image does not match cost volume".into()));
    }
    let gray = left.to_gray();
    let mut sum = CostVolume::new(vol.width, vol.height, vol.dmax, 0.0);
    if vol.cost.is_empty() {
        return Ok(sum);
    }
    let mut path = vec![0f32; vol.cost.len()];
    for &dir in DIRECTIONS.iter().take(params.paths) {
        aggregate_direction(vol, &gray, params, dir, &mut path);
        let chunk = vol.width * vol.dmax;
        for_each_chunk2(params.execution, &mut sum.cost, chunk, &mut path, chunk, |_, s, p| {
            for (a, b) in s.iter_mut().zip(p.iter()) {
                *a += *b;
            }
        });
    }
    Ok(sum)
}

/// Index of the first minimum.
#[inline]
fn argmin(costs: &[f32]) -> usize {
    let mut best = 0;
    for (d, &c) in costs.iter().enumerate().skip(1) {
        if c < costs[best] {
            best = d;
        }
    }
    best
}

/// Vertex offset of the parabola through `(−1, c_minus), (0, c0), (1, c_plus)`.
pub fn parabola_offset(c_minus: f32, c0: f32, c_plus: f32) -> f32 {
    let denom = c_minus - 2.0 * c0 + c_plus;
    if denom <= 0.0 {
        return 0.0;
    }
    ((c_minus - c_plus) / (2.0 * denom)).clamp(-0.5, 0.5)
}

/// Winner-takes-all with parabola refinement; winners at the ends of the
/// disparity range stay integer.
pub fn wta_subpixel(vol: &CostVolume) -> DisparityMap {
    let dm = vol.dmax;
    DisparityMap::from_fn(vol.width, vol.height, |x, y| {
        let c = vol.pixel(x, y);
        if dm == 0 {
            return INVALID;
        }
        let d = argmin(c);
        if d == 0 || d + 1 >= dm {
            d as f32
        } else {
            d as f32 + parabola_offset(c[d - 1], c[d], c[d + 1])
        }
    })
}

/// Right-view disparities read diagonally out of the left-referenced volume:
/// `C_R(x, d) = C_L(x + d, d)`.
pub fn wta_right(vol: &CostVolume) -> DisparityMap {
    let (w, dm) = (vol.width, vol.dmax);
    DisparityMap::from_fn(vol.width, vol.height, |x, y| {
        let mut best = (f32::INFINITY, INVALID);
        for d in 0..dm.min(w - x) {
            let c = vol.get(x + d, y, d);
            if c < best.0 {
                best = (c, d as f32);
            }
        }
        best.1
    })
}

/// Invalidates left pixels whose right-view match disagrees by more than
/// `threshold`, or whose match leaves the right image.
pub fn lr_check(left: &DisparityMap, right: &DisparityMap, threshold: f32) -> DisparityMap {
    let mut out = left.clone();
    for y in 0..left.height() {
        for x in 0..left.width() {
            let Some(dl) = left.get(x, y) else { continue };
            let xr = x as i64 - dl.round() as i64;
            let consistent = xr >= 0
                && right
                    .get(xr as usize, y)
                    .is_some_and(|dr| (dl - dr).abs() <= threshold);
            if !consistent {
                out.invalidate(x, y);
            }
        }
    }
    out
}

/// Removes 4-connected regions (neighbors within `max_diff`) smaller than `min_region` pixels.
pub fn speckle_filter(map: &DisparityMap, max_diff: f32, min_region: usize) -> DisparityMap {
    let (w, h) = (map.width(), map.height());
    let mut out = map.clone();
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::new();
    let mut region = Vec::new();
    for start in 0..w * h {
        if seen[start] || !map.is_valid(start % w, start / w) {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        region.clear();
        while let Some(i) = queue.pop_front() {
            region.push(i);
            let (x, y) = (i % w, i / w);
            let v = map.raw(x, y);
            let mut visit = |nx: usize, ny: usize| {
                let j = ny * w + nx;
                if !seen[j] && map.is_valid(nx, ny) && (map.raw(nx, ny) - v).abs() <= max_diff {
                    seen[j] = true;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(x - 1, y);
            }
            if x + 1 < w {
                visit(x + 1, y);
            }
            if y > 0 {
                visit(x, y - 1);
            }
            if y + 1 < h {
                visit(x, y + 1);
            }
        }
        if region.len() < min_region {
            for &i in &region {
                out.invalidate(i % w, i / w);
            }
        }
    }
    out
}

/// Fills invalid pixels with the smaller of the nearest valid values to the
/// left and right on the same row; rows without any valid pixel copy the
/// nearest filled row (upper row on ties).
pub fn fill_background(map: &DisparityMap) -> DisparityMap {
    let (w, h) = (map.width(), map.height());
    let mut out = map.clone();
    let mut has_valid = vec![false; h];
    for (y, flag) in has_valid.iter_mut().enumerate() {
        let mut left_val = vec![INVALID; w];
        let mut last = INVALID;
        for (x, lv) in left_val.iter_mut().enumerate() {
            if map.is_valid(x, y) {
                last = map.raw(x, y);
            }
            *lv = last;
        }
        let mut right_val = INVALID;
        for x in (0..w).rev() {
            if map.is_valid(x, y) {
                right_val = map.raw(x, y);
                *flag = true;
                continue;
            }
            let v = left_val[x].min(right_val);
            if v != INVALID {
                out.set(x, y, v);
            }
        }
    }
    let donors: Vec<usize> = (0..h).filter(|&y| has_valid[y]).collect();
    if donors.is_empty() {
        return out;
    }
    for y in (0..h).filter(|&y| !has_valid[y]) {
        let src = *donors
            .iter()
            .min_by_key(|&&d| ((d as i64 - y as i64).abs(), d))
            .expect("non-empty");
        for x in 0..w {
            let v = out.raw(x, src);
            out.set(x, y, v);
        }
    }
    out
}

/// Left-right check, speckle removal and background fill, in that order.
pub fn lr_check_speckle_fill(left: &DisparityMap, right: &DisparityMap, params: &SgmParams) -> DisparityMap {
    let checked = lr_check(left, right, params.lr_threshold);
    let filtered = speckle_filter(&checked, params.speckle_max_diff, params.speckle_min_region);
    fill_background(&filtered)
}

/// Cost-volume guidance strength.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GuideParams {
    pub k: f64,
    pub w: f64,
}

impl Default for GuideParams {
    fn default() -> Self {
        Self { k: 10.0, w: 10.0 }
    }
}

/// Scales the costs of every hinted pixel by
/// `1 + k·(1 − exp(−(d − d̂)² / (2w²)))`, leaving the hinted disparity
/// untouched and penalizing the others.
pub fn guide_cost_volume(vol: &CostVolume, hints: &HintSet, guide: &GuideParams) -> Result<CostVolume> {
    if !(guide.w > 0.0) || !(guide.k >= 0.0) {
        return Err(Error::Validation(format!(
            "guidance needs k ≥ 0 and w > 0, got k={} w={}",
            guide.k, guide.w
        )));
    }
    hints.check_bounds(vol.width, vol.height)?;
    let mut out = vol.clone();
    let two_w2 = 2.0 * guide.w * guide.w;
    for hnt in hints {
        for d in 0..vol.dmax {
            let diff = d as f64 - hnt.d;
            let factor = 1.0 + guide.k * (1.0 - (-diff * diff / two_w2).exp());
            let c = vol.get(hnt.x, hnt.y, d) as f64;
            out.set(hnt.x, hnt.y, d, (c * factor) as f32);
        }
    }
    Ok(out)
}

/// Full matcher: census costs, optional guidance, aggregation, WTA for both
/// views and post-processing.
pub fn match_pair(
    left: &ImageBuffer,
    right: &ImageBuffer,
    params: &SgmParams,
    guide: Option<(&HintSet, &GuideParams)>,
) -> Result<DisparityMap> {
    params.validate()?;
    if !left.same_shape(right) {
        return Err(Error::Contract("stereo images differ in shape".into()));
    }
    let mut vol = census_cost_with(left, right, params.max_disp, params.census_window, params.execution)?;
    if let Some((hints, g)) = guide {
        vol = guide_cost_volume(&vol, hints, g)?;
    }
    let agg = sgm_aggregate(&vol, left, params)?;
    drop(vol);
    let dl = wta_subpixel(&agg);
    let dr = wta_right(&agg);
    Ok(lr_check_speckle_fill(&dl, &dr, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Hint;
    use proptest::prelude::*;

    #[test]
    fn constant_images_cost_zero() {
        let img = ImageBuffer::from_fn_gray(12, 6, |_, _| 90);
        let v = census_cost(&img, &img, 8, 5).unwrap();
        for y in 0..6 {
            for x in 0..12 {
                for d in 0..8 {
                    let expect = if d <= x { 0.0 } else { 24.0 };
                    assert_eq!(v.get(x, y, d), expect);
                }
            }
        }
    }

    #[test]
    fn census_bit_counts() {
        assert_eq!(census_bits(5), 24);
        assert_eq!(census_bits(3), 8);
        assert!(census_transform(&ImageBuffer::new(3, 3, 1).unwrap(), 9, Execution::Sequential).is_err());
    }

    #[test]
    fn census_marks_darker_neighbors() {
        let img = ImageBuffer::from_fn_gray(3, 3, |x, y| if (x, y) == (1, 1) { 50 } else if x == 0 { 10 } else { 90 });
        let c = census_transform(&img, 3, Execution::Sequential).unwrap();
        // row-major neighbors of (1,1): x=0 entries are darker
        assert_eq!(c[4], 0b1001_0100);
    }

    #[test]
    fn adaptive_p2() {
        let p = SgmParams::default();
        assert_eq!(p.p2(0.0), 35.0);
        assert_eq!(p.p2(36.0), 17.0);
        assert_eq!(p.p2(-36.0), 17.0);
        assert_eq!(p.p2(10.0), 30.0);
        assert!(p.p1 < p.p2_min);
        assert!(p.validate().is_ok());
        assert!(SgmParams { paths: 6, ..p }.validate().is_err());
        assert!(SgmParams { p1: 20.0, ..p }.validate().is_err());
    }

    #[test]
    fn parabola_examples() {
        assert_eq!(parabola_offset(4.0, 1.0, 4.0), 0.0);
        assert_eq!(parabola_offset(4.0, 1.0, 2.0), 0.25);
        let vol = CostVolume::from_fn(1, 1, 4, |_, _, d| [1.0, 3.0, 5.0, 7.0][d]);
        assert_eq!(wta_subpixel(&vol).get(0, 0), Some(0.0));
        let vol = CostVolume::from_fn(1, 1, 4, |_, _, d| [9.0, 4.0, 1.0, 2.0][d]);
        assert_eq!(wta_subpixel(&vol).get(0, 0), Some(2.25));
    }

    #[test]
    fn uniform_costs_preserve_argmin() {
        let vol = CostVolume::from_fn(9, 5, 6, |_, _, d| if d == 3 { 1.0 } else { 8.0 });
        let img = ImageBuffer::from_fn_gray(9, 5, |x, y| (x * 20 + y) as u8);
        for paths in [4, 8] {
            let agg = sgm_aggregate(&vol, &img, &SgmParams { paths, max_disp: 6, ..Default::default() }).unwrap();
            let m = wta_subpixel(&agg);
            assert!(m.values().iter().all(|&v| v == 3.0));
        }
    }

    #[test]
    fn sequential_matches_parallel() {
        let l = ImageBuffer::from_fn_gray(47, 23, |x, y| ((x * 37 + y * 91 + x * y) % 256) as u8);
        let r = ImageBuffer::from_fn_gray(47, 23, |x, y| (((x + 3) * 37 + y * 91 + (x + 3) * y) % 256) as u8);
        let seq = SgmParams { max_disp: 12, execution: Execution::Sequential, ..Default::default() };
        let par = SgmParams { execution: Execution::Parallel, ..seq };
        let vs = census_cost_with(&l, &r, 12, 5, Execution::Sequential).unwrap();
        let vp = census_cost_with(&l, &r, 12, 5, Execution::Parallel).unwrap();
        assert_eq!(vs, vp);
        assert_eq!(sgm_aggregate(&vs, &l, &seq).unwrap(), sgm_aggregate(&vp, &l, &par).unwrap());
    }

    #[test]
    fn lr_identity_on_consistent_maps() {
        let l = DisparityMap::from_fn(30, 20, |_, _| 3.0);
        let r = DisparityMap::from_fn(30, 20, |_, _| 3.0);
        let p = SgmParams { speckle_min_region: 10, ..Default::default() };
        let out = lr_check_speckle_fill(&l, &r, &p);
        // the three left-most columns match outside the right view and get refilled
        assert!(out.values().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn spike_removed_and_refilled() {
        let l = DisparityMap::from_fn(5, 5, |x, y| if (x, y) == (4, 2) { 4.0 } else { 1.0 });
        let r = DisparityMap::from_fn(5, 5, |_, _| 1.0);
        let p = SgmParams { speckle_min_region: 3, lr_threshold: 10.0, ..Default::default() };
        // LR passes everything except column 0 (match at −1)
        let checked = lr_check(&l, &r, p.lr_threshold);
        assert_eq!(checked.get(0, 2), None);
        assert_eq!(checked.get(4, 2), Some(4.0));
        let filtered = speckle_filter(&checked, 1.0, 3);
        assert_eq!(filtered.get(4, 2), None);
        let out = fill_background(&filtered);
        assert!(out.values().iter().all(|&v| v == 1.0));
        assert_eq!(lr_check_speckle_fill(&l, &r, &p), out);
    }

    #[test]
    fn hole_takes_background() {
        let m = DisparityMap::from_values(5, 1, vec![10.0, INVALID, INVALID, 4.0, 4.0]).unwrap();
        assert_eq!(fill_background(&m).values(), &[10.0, 4.0, 4.0, 4.0, 4.0]);
    }

    #[test]
    fn empty_rows_copy_nearest() {
        let m = DisparityMap::from_values(2, 3, vec![INVALID, INVALID, 2.0, INVALID, INVALID, INVALID]).unwrap();
        assert_eq!(fill_background(&m).values(), &[2.0, 2.0, 2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn guidance_identities() {
        let vol = CostVolume::from_fn(4, 3, 16, |x, y, d| (x + y + d) as f32 + 1.0);
        let hs = HintSet::new(vec![Hint::new(1, 1, 5.0)]).unwrap();
        let g = guide_cost_volume(&vol, &hs, &GuideParams { k: 0.0, w: 10.0 }).unwrap();
        assert_eq!(g, vol);
        let g = guide_cost_volume(&vol, &hs, &GuideParams { k: 3.0, w: 1.0 }).unwrap();
        assert_eq!(g.get(1, 1, 5), vol.get(1, 1, 5));
        assert!((g.get(1, 1, 15) / vol.get(1, 1, 15) - 4.0).abs() < 1e-5);
        assert_eq!(g.get(2, 1, 15), vol.get(2, 1, 15));
        assert!(guide_cost_volume(&vol, &hs, &GuideParams { k: 1.0, w: 0.0 }).is_err());
    }

    proptest! {
        #[test]
        fn argmin_shift_invariant(costs in proptest::collection::vec(0u8..60, 2..30), shift in 0u8..100) {
            let n = costs.len();
            let a = CostVolume::from_fn(1, 1, n, |_, _, d| costs[d] as f32);
            let b = CostVolume::from_fn(1, 1, n, |_, _, d| costs[d] as f32 + shift as f32);
            prop_assert_eq!(wta_subpixel(&a), wta_subpixel(&b));
        }

        #[test]
        fn strong_guidance_steers(costs in proptest::collection::vec(1u8..25, 32), hint in 0u32..32) {
            let vol = CostVolume::from_fn(1, 1, 32, |_, _, d| costs[d] as f32);
            let hs = HintSet::new(vec![Hint::new(0, 0, hint as f64)]).unwrap();
            let g = guide_cost_volume(&vol, &hs, &GuideParams { k: 100.0, w: 1.0 }).unwrap();
            let d = wta_subpixel(&g).get(0, 0).unwrap();
            prop_assert!((d - hint as f32).abs() <= 1.0);
        }

        #[test]
        fn postprocess_stays_within_row_range(vals in proptest::collection::vec(prop_oneof![1 => Just(-1.0f32), 3 => 0.0f32..40.0], 8 * 6)) {
            let l = DisparityMap::from_values(8, 6, vals).unwrap();
            let r = DisparityMap::from_fn(8, 6, |x, y| l.raw(x, y));
            let p = SgmParams { speckle_min_region: 2, ..Default::default() };
            let filtered = speckle_filter(&lr_check(&l, &r, p.lr_threshold), p.speckle_max_diff, p.speckle_min_region);
            let out = fill_background(&filtered);
            for y in 0..6 {
                let row: Vec<f32> = (0..8).filter_map(|x| filtered.get(x, y)).collect();
                if row.is_empty() { continue; }
                let (lo, hi) = row.iter().fold((f32::MAX, f32::MIN), |(a, b), &v| (a.min(v), b.max(v)));
                for x in 0..8 {
                    let v = out.get(x, y).unwrap();
                    prop_assert!(v >= lo && v <= hi);
                }
            }
        }
    }
}
