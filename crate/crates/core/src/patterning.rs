//! The projection engine: paints the same virtual pattern at both ends of
//! every hinted correspondence.
//!
//! For a hint `(x, y, d)` the reference pixel `(x, y)` and the target
//! position `(x − d, y)` receive an identical pattern value. The target
//! position is generally fractional, so the value is splatted onto the two
//! bracketing columns with weights `1 − β` and `β`. Patterns may cover a
//! square patch (sharing the center disparity), can be alpha-blended with
//! the original content, and are either random or chosen from the local
//! scanline histogram to stand out from it.
//!
//! Hints are processed in ascending `(y, x)` order. Histogram-driven variants
//! look at the buffers as modified by earlier hints.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{correspondence, Correspondence};
use crate::types::{HintSet, ImageBuffer};

/// Pattern families, numbered as in the usual taxonomy (ii)–(vii).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// (ii) one random color per hint pixel.
    RandomPoint,
    /// (iii) one histogram-chosen color per hint pixel.
    HistPoint,
    /// (iv) one random color for the whole patch.
    RandomUniformPatch,
    /// (v) one histogram-chosen color for the whole patch.
    HistUniformPatch,
    /// (vi) independent random color for every patch pixel.
    RandomPerPixelPatch,
    /// (vii) independent histogram-chosen color for every patch pixel.
    HistPerPixelPatch,
}

impl Variant {
    /// Picks the variant from CLI-style knobs.
    pub fn from_parts(histogram: bool, patch: usize, uniform: bool) -> Self {
        match (histogram, patch <= 1, uniform) {
            (false, true, _) => Variant::RandomPoint,
            (true, true, _) => Variant::HistPoint,
            (false, false, true) => Variant::RandomUniformPatch,
            (true, false, true) => Variant::HistUniformPatch,
            (false, false, false) => Variant::RandomPerPixelPatch,
            (true, false, false) => Variant::HistPerPixelPatch,
        }
    }

    pub fn is_histogram(self) -> bool {
        matches!(
            self,
            Variant::HistPoint | Variant::HistUniformPatch | Variant::HistPerPixelPatch
        )
    }

    pub fn is_pointwise(self) -> bool {
        matches!(self, Variant::RandomPoint | Variant::HistPoint)
    }

    pub fn is_uniform_patch(self) -> bool {
        matches!(self, Variant::RandomUniformPatch | Variant::HistUniformPatch)
    }

    pub fn roman(self) -> &'static str {
        match self {
            Variant::RandomPoint => "ii",
            Variant::HistPoint => "iii",
            Variant::RandomUniformPatch => "iv",
            Variant::HistUniformPatch => "v",
            Variant::RandomPerPixelPatch => "vi",
            Variant::HistPerPixelPatch => "vii",
        }
    }
}

/// What to do with hints flagged as occluded in the target view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OcclusionStrategy {
    /// Skip them entirely.
    No,
    /// Project as if they were visible.
    Bkgd,
    /// Leave the target untouched and copy target content at `(x − d, y)`
    /// into the reference image.
    Fgd,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct VppConfig {
    pub variant: Variant,
    pub patch: usize,
    pub alpha: f64,
    pub occlusion: OcclusionStrategy,
    pub window_length: usize,
    pub seed: u64,
}

impl Default for VppConfig {
    fn default() -> Self {
        Self {
            variant: Variant::RandomPerPixelPatch,
            patch: 3,
            alpha: 0.4,
            occlusion: OcclusionStrategy::Fgd,
            window_length: 64,
            seed: 0,
        }
    }
}

impl VppConfig {
    /// Effective patch side: pointwise variants always use 1.
    pub fn patch_size(&self) -> usize {
        if self.variant.is_pointwise() {
            1
        } else {
            self.patch
        }
    }

    pub fn validate(&self) -> Result<()> {
        let patch = self.patch_size();
        if patch.is_multiple_of(2) {
            return Err(Error::Validation(format!("patch size {patch} must be odd")));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Validation(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.window_length < patch {
            return Err(Error::Validation(format!(
                "window length {} shorter than patch {patch}",
                self.window_length
            )));
        }
        Ok(())
    }
}

/// Intensity counts over 256 levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram256 {
    bins: [u32; 256],
}

impl Default for Histogram256 {
    fn default() -> Self {
        Self { bins: [0; 256] }
    }
}

impl Histogram256 {
    pub fn from_bins(bins: [u32; 256]) -> Self {
        Self { bins }
    }

    pub fn bins(&self) -> &[u32; 256] {
        &self.bins
    }

    pub fn add(&mut self, v: u8) {
        self.bins[v as usize] += 1;
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().map(|&c| c as u64).sum()
    }

    /// Distance from `i` to the nearest filled bin (0 when `i` itself is
    /// filled), or `None` when the histogram is empty.
    pub fn hdist(&self, i: u8) -> Option<u32> {
        let i = i as usize;
        if self.bins[i] > 0 {
            return Some(0);
        }
        let below = (0..i).rev().find(|&j| self.bins[j] > 0).map(|j| (i - j) as u32);
        let above = (i + 1..256).find(|&j| self.bins[j] > 0).map(|j| (j - i) as u32);
        match (below, above) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// The level farthest from every filled bin (smallest level on ties). If
    /// every bin is filled, the least frequent level. Empty histograms give 0.
    pub fn hdist_color(&self) -> u8 {
        if self.bins.iter().all(|&c| c > 0) {
            let (mut best, mut best_count) = (0usize, u32::MAX);
            for (i, &c) in self.bins.iter().enumerate() {
                if c < best_count {
                    best = i;
                    best_count = c;
                }
            }
            return best as u8;
        }
        // two sweeps for the distance to the nearest filled bin
        let mut dist = [u32::MAX; 256];
        let mut last: Option<usize> = None;
        for i in 0..256 {
            if self.bins[i] > 0 {
                last = Some(i);
            }
            if let Some(j) = last {
                dist[i] = (i - j) as u32;
            }
        }
        last = None;
        for i in (0..256).rev() {
            if self.bins[i] > 0 {
                last = Some(i);
            }
            if let Some(j) = last {
                dist[i] = dist[i].min((j - i) as u32);
            }
        }
        let mut best = 0usize;
        for i in 1..256 {
            if dist[i] > dist[best] {
                best = i;
            }
        }
        best as u8
    }
}

/// One uniformly random level per channel.
pub fn random_color<R: Rng + ?Sized>(rng: &mut R, channels: usize) -> [u8; 3] {
    let mut out = [0u8; 3];
    for c in out.iter_mut().take(channels) {
        *c = rng.random::<u8>();
    }
    out
}

fn accumulate_window(img: &ImageBuffer, cx: i64, y: i64, len: usize, hists: &mut [Histogram256]) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let x0 = cx - (len / 2) as i64;
    let x1 = x0 + len as i64; // exclusive
    for yy in (y - 1).max(0)..=(y + 1).min(h - 1) {
        for xx in x0.max(0)..x1.min(w) {
            for (c, hist) in hists.iter_mut().enumerate() {
                hist.add(img.get(xx as usize, yy as usize, c));
            }
        }
    }
}

/// Per-channel sum of the histograms of two 3×`len` windows, centered on
/// `(x, y)` in the left image and `(round(x'), y)` in the right one. Windows
/// are clipped at the image border; a window of even length spans
/// `[c − len/2, c + len/2)`.
pub fn gather_histogram(
    left: &ImageBuffer,
    right: &ImageBuffer,
    x: i64,
    x_prime: f64,
    y: i64,
    len: usize,
) -> Vec<Histogram256> {
    let mut hists = vec![Histogram256::default(); left.channels()];
    accumulate_window(left, x, y, len, &mut hists);
    accumulate_window(right, x_prime.round() as i64, y, len, &mut hists);
    hists
}

#[inline]
fn round_u8(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Real-valued results of splatting `value` at a target position with
/// fractional part `beta`, blended with weight `alpha`: the floor column gets
/// weight `alpha·(1 − β)`, the ceiling column `alpha·β`.
pub fn splat_values(beta: f64, alpha: f64, value: f64, floor_orig: f64, ceil_orig: f64) -> (f64, f64) {
    let wf = alpha * (1.0 - beta);
    let wc = alpha * beta;
    (
        (1.0 - wf) * floor_orig + wf * value,
        (1.0 - wc) * ceil_orig + wc * value,
    )
}

/// Splats `value` (one entry per channel) at `(x', y)` with blending weight
/// `alpha`. Columns outside the image are skipped. An integer `x'` writes a
/// single pixel.
pub fn splat_right_blended(img: &mut ImageBuffer, x_prime: f64, y: usize, value: &[u8], alpha: f64) {
    let w = img.width() as i64;
    let fl = x_prime.floor();
    let beta = x_prime - fl;
    let fl = fl as i64;
    for c in 0..img.channels() {
        let a = value[c] as f64;
        let orig_f = if (0..w).contains(&fl) { img.get(fl as usize, y, c) as f64 } else { 0.0 };
        let orig_c = if (0..w).contains(&(fl + 1)) { img.get((fl + 1) as usize, y, c) as f64 } else { 0.0 };
        let (vf, vc) = splat_values(beta, alpha, a, orig_f, orig_c);
        if (0..w).contains(&fl) {
            img.set(fl as usize, y, c, round_u8(vf));
        }
        if beta > 0.0 && (0..w).contains(&(fl + 1)) {
            img.set((fl + 1) as usize, y, c, round_u8(vc));
        }
    }
}

/// Unblended splat: `I(⌊x'⌋) ← β·I(⌊x'⌋) + (1−β)·A`, `I(⌈x'⌉) ← (1−β)·I(⌈x'⌉) + β·A`.
pub fn splat_right(img: &mut ImageBuffer, x_prime: f64, y: usize, value: &[u8]) {
    splat_right_blended(img, x_prime, y, value, 1.0);
}

fn blend_left(img: &mut ImageBuffer, x: usize, y: usize, value: &[u8], alpha: f64) {
    for c in 0..img.channels() {
        let orig = img.get(x, y, c) as f64;
        img.set(x, y, c, round_u8((1.0 - alpha) * orig + alpha * value[c] as f64));
    }
}

/// Linear interpolation along row `y` at column `x`, rounded. `None` outside
/// the image.
fn sample_row(img: &ImageBuffer, x: f64, y: usize, c: usize) -> Option<u8> {
    if x < 0.0 {
        return None;
    }
    let fl = x.floor();
    let beta = x - fl;
    let fl = fl as usize;
    if fl >= img.width() {
        return None;
    }
    let a = img.get(fl, y, c) as f64;
    if beta == 0.0 {
        return Some(a as u8);
    }
    if fl + 1 >= img.width() {
        return None;
    }
    let b = img.get(fl + 1, y, c) as f64;
    Some(round_u8((1.0 - beta) * a + beta * b))
}

struct Projector<'a> {
    left: &'a mut ImageBuffer,
    right: &'a mut ImageBuffer,
    config: &'a VppConfig,
    rng: ChaCha8Rng,
}

impl Projector<'_> {
    fn choose(&mut self, x: i64, x_prime: f64, y: i64) -> [u8; 3] {
        let channels = self.left.channels();
        if self.config.variant.is_histogram() {
            let hists = gather_histogram(self.left, self.right, x, x_prime, y, self.config.window_length);
            let mut out = [0u8; 3];
            for (c, h) in hists.iter().enumerate() {
                out[c] = h.hdist_color();
            }
            out
        } else {
            random_color(&mut self.rng, channels)
        }
    }

    fn project(&mut self, corr: &Correspondence) {
        let r = (self.config.patch_size() / 2) as i64;
        let (w, h) = (self.left.width() as i64, self.left.height() as i64);
        let to_target = !corr.out_of_target();
        let (cx, cy) = (corr.x as i64, corr.y as i64);
        let uniform = self
            .config
            .variant
            .is_uniform_patch()
            .then(|| self.choose(cx, corr.x_prime, cy));
        for dy in -r..=r {
            for dx in -r..=r {
                let (lx, ly) = (cx + dx, cy + dy);
                let rx = corr.x_prime + dx as f64;
                let value = match uniform {
                    Some(v) => v,
                    None if self.config.variant.is_histogram() => {
                        if !(0..h).contains(&ly) {
                            continue;
                        }
                        self.choose(lx, rx, ly)
                    }
                    None => random_color(&mut self.rng, self.left.channels()),
                };
                if !(0..h).contains(&ly) {
                    continue;
                }
                if (0..w).contains(&lx) {
                    blend_left(self.left, lx as usize, ly as usize, &value, self.config.alpha);
                }
                if to_target {
                    splat_right_blended(self.right, rx, ly as usize, &value, self.config.alpha);
                }
            }
        }
    }

    fn copy_foreground(&mut self, corr: &Correspondence) {
        let r = (self.config.patch_size() / 2) as i64;
        let (w, h) = (self.left.width() as i64, self.left.height() as i64);
        for dy in -r..=r {
            let ly = corr.y as i64 + dy;
            if !(0..h).contains(&ly) {
                continue;
            }
            for dx in -r..=r {
                let lx = corr.x as i64 + dx;
                if !(0..w).contains(&lx) {
                    continue;
                }
                let rx = corr.x_prime + dx as f64;
                for c in 0..self.left.channels() {
                    if let Some(v) = sample_row(self.right, rx, ly as usize, c) {
                        self.left.set(lx as usize, ly as usize, c, v);
                    }
                }
            }
        }
    }
}

/// Augments a rectified pair with virtual patterns at the hinted
/// correspondences and returns the new `(left, right)` images.
///
/// Hints must already carry occlusion flags. Visible hints (and occluded ones
/// under [`OcclusionStrategy::Bkgd`]) are projected in ascending `(y, x)`
/// order. Hints whose target column is negative are projected on the left
/// image only. Under [`OcclusionStrategy::Fgd`] the occluded hints are handled
/// after all projections: their left patch is replaced by the right content
/// at `(x − d, y)`, sampled linearly along the row.
pub fn apply_vpp(
    left: &ImageBuffer,
    right: &ImageBuffer,
    hints: &HintSet,
    config: &VppConfig,
) -> Result<(ImageBuffer, ImageBuffer)> {
    if !left.same_shape(right) {
        return Err(Error::Contract(format!(
            "left {}x{}x{} and right {}x{}x{} differ",
            left.width(),
            left.height(),
            left.channels(),
            right.width(),
            right.height(),
            right.channels()
        )));
    }
    config.validate()?;
    hints.check_bounds(left.width(), left.height())?;

    let mut out_l = left.clone();
    let mut out_r = right.clone();
    let mut order: Vec<usize> = (0..hints.len()).collect();
    order.sort_by_key(|&i| (hints.entries()[i].y, hints.entries()[i].x));

    let mut projector = Projector {
        left: &mut out_l,
        right: &mut out_r,
        config,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
    };
    let mut deferred = Vec::new();
    for &i in &order {
        let h = &hints.entries()[i];
        let corr = correspondence(h.x, h.y, h.d);
        if corr.out_of_target() || !h.occluded {
            projector.project(&corr);
            continue;
        }
        match config.occlusion {
            OcclusionStrategy::No => {}
            OcclusionStrategy::Bkgd => projector.project(&corr),
            OcclusionStrategy::Fgd => deferred.push(corr),
        }
    }
    for corr in &deferred {
        projector.copy_foreground(corr);
    }
    Ok((out_l, out_r))
}
