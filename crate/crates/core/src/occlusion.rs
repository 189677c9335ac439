//! Flags hints whose correspondence is hidden in the target view.
//!
//! Hint disparities are forward-warped into a target-frame grid. A filled
//! cell `o` is occluded when some other filled cell `n` in an `rx × ry`
//! window satisfies
//!
//! ```text
//! W(n) − W(o) − λ·(γ·|xn − xo| + (1 − γ)·|yn − yo|) > t
//! ```
//!
//! i.e. a nearby point is closer to the camera by more than what a slanted
//! surface would explain.

use crate::error::{Error, Result};
use crate::geometry::correspondence;
use crate::types::HintSet;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OcclusionParams {
    pub lambda: f64,
    pub gamma: f64,
    pub t: f64,
    pub rx: usize,
    pub ry: usize,
}

impl Default for OcclusionParams {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            gamma: 0.4375,
            t: 1.0,
            rx: 9,
            ry: 7,
        }
    }
}

impl OcclusionParams {
    pub fn validate(&self) -> Result<()> {
        if self.rx.is_multiple_of(2) || self.ry.is_multiple_of(2) {
            return Err(Error::Validation(format!(
                "occlusion window {}x{} must have odd sides",
                self.rx, self.ry
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Validation(format!(
                "gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        if !self.lambda.is_finite() || !self.t.is_finite() {
            return Err(Error::Validation("lambda and t must be finite".into()));
        }
        Ok(())
    }
}

/// Hint disparities forward-warped into the target frame.
#[derive(Debug, Clone)]
pub struct WarpGrid {
    width: usize,
    height: usize,
    values: Vec<Option<f64>>,
    /// Hint index that won each filled cell.
    origin: Vec<Option<usize>>,
    /// Cell each in-target hint warped to, indexed like the hint set.
    hint_cell: Vec<Option<usize>>,
}

impl WarpGrid {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        self.values[y * self.width + x]
    }

    pub fn origin(&self, x: usize, y: usize) -> Option<usize> {
        self.origin[y * self.width + x]
    }

    pub fn filled_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }
}

/// Target column of a hint, rounded half-to-even; `None` when it leaves the image.
fn warp_column(x: usize, d: f64, width: usize) -> Option<usize> {
    let c = correspondence(x, 0, d);
    if c.out_of_target() {
        return None;
    }
    let col = c.x_prime.round_ties_even();
    (col >= 0.0 && (col as usize) < width).then_some(col as usize)
}

/// Warps every hint to `(round(x − d), y)`, keeping the largest disparity per
/// cell (equal disparities: smaller source column wins). Hints that leave the
/// target image get `out_of_target` set and stay out of the grid.
pub fn build_warp_grid(hints: &mut HintSet, width: usize, height: usize) -> Result<WarpGrid> {
    hints.check_bounds(width, height)?;
    let mut grid = WarpGrid {
        width,
        height,
        values: vec![None; width * height],
        origin: vec![None; width * height],
        hint_cell: vec![None; hints.len()],
    };
    for (i, h) in hints.entries_mut().iter_mut().enumerate() {
        match warp_column(h.x, h.d, width) {
            Some(col) => {
                h.out_of_target = false;
                grid.hint_cell[i] = Some(h.y * width + col);
            }
            None => h.out_of_target = true,
        }
    }
    let entries = hints.entries();
    for (i, cell) in grid.hint_cell.iter().enumerate() {
        let Some(cell) = *cell else { continue };
        let h = &entries[i];
        let wins = match grid.origin[cell] {
            Some(j) => {
                let cur = &entries[j];
                h.d > cur.d || (h.d == cur.d && h.x < cur.x)
            }
            None => true,
        };
        if wins {
            grid.values[cell] = Some(h.d);
            grid.origin[cell] = Some(i);
        }
    }
    Ok(grid)
}

/// Writes occlusion flags back onto the hints the grid was built from.
///
/// Cells are tested against every other filled cell in the window centered
/// on them. Hints that lost a collision are tested against the winner of
/// their cell at zero offset. Out-of-target hints are never flagged.
pub fn classify_occlusions(
    grid: &WarpGrid,
    params: &OcclusionParams,
    hints: &mut HintSet,
) -> Result<()> {
    params.validate()?;
    if grid.hint_cell.len() != hints.len() {
        return Err(Error::Contract(
            "warp grid was built from a different hint set".into(),
        ));
    }
    let (w, h) = (grid.width as i64, grid.height as i64);
    let (hx, hy) = ((params.rx / 2) as i64, (params.ry / 2) as i64);
    let occluded_cell = |cell: usize| -> bool {
        let Some(center) = grid.values[cell] else {
            return false;
        };
        let (xo, yo) = ((cell % grid.width) as i64, (cell / grid.width) as i64);
        for y in (yo - hy).max(0)..=(yo + hy).min(h - 1) {
            for x in (xo - hx).max(0)..=(xo + hx).min(w - 1) {
                if x == xo && y == yo {
                    continue;
                }
                let Some(other) = grid.values[(y * w + x) as usize] else {
                    continue;
                };
                let penalty = params.lambda
                    * (params.gamma * (x - xo).abs() as f64
                        + (1.0 - params.gamma) * (y - yo).abs() as f64);
                if other - center - penalty > params.t {
                    return true;
                }
            }
        }
        false
    };

    let entries = hints.entries_mut();
    for (i, cell) in grid.hint_cell.iter().enumerate() {
        entries[i].occluded = match *cell {
            None => false,
            Some(cell) if grid.origin[cell] == Some(i) => occluded_cell(cell),
            Some(cell) => {
                let winner = grid.values[cell].expect("cell with members is filled");
                winner - entries[i].d > params.t || occluded_cell(cell)
            }
        };
    }
    Ok(())
}

/// Builds the warp grid and classifies every hint in one call.
pub fn detect_occlusions(
    hints: &mut HintSet,
    width: usize,
    height: usize,
    params: &OcclusionParams,
) -> Result<WarpGrid> {
    let grid = build_warp_grid(hints, width, height)?;
    classify_occlusions(&grid, params, hints)?;
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Hint;
    use proptest::prelude::*;

    fn set(h: &[(usize, usize, f64)]) -> HintSet {
        HintSet::new(h.iter().map(|&(x, y, d)| Hint::new(x, y, d)).collect()).unwrap()
    }

    #[test]
    fn collision_keeps_largest() {
        let mut hs = set(&[(10, 5, 4.0), (9, 5, 3.0)]);
        let g = build_warp_grid(&mut hs, 20, 10).unwrap();
        assert_eq!(g.get(6, 5), Some(4.0));
        assert_eq!(g.origin(6, 5), Some(0));
        assert_eq!(g.filled_count(), 1);
    }

    #[test]
    fn equal_disparity_collision_prefers_smaller_x() {
        // 10 − 3.5 = 6.5 → 6 (ties to even), 9 − 3.5 = 5.5 → 6
        let mut hs = set(&[(10, 0, 3.5), (9, 0, 3.5)]);
        let g = build_warp_grid(&mut hs, 20, 1).unwrap();
        assert_eq!(g.origin(6, 0), Some(1));
    }

    #[test]
    fn identity_warp_and_border() {
        let mut hs = set(&[(10, 5, 0.0), (2, 0, 5.0)]);
        let g = build_warp_grid(&mut hs, 20, 10).unwrap();
        assert_eq!(g.get(10, 5), Some(0.0));
        assert!(!hs.entries()[0].out_of_target);
        assert!(hs.entries()[1].out_of_target);
        assert_eq!(g.filled_count(), 1);
    }

    #[test]
    fn rejects_out_of_bounds_hint() {
        let mut hs = set(&[(30, 0, 1.0)]);
        assert!(build_warp_grid(&mut hs, 20, 1).is_err());
    }

    #[test]
    fn foreground_neighbor_occludes() {
        // cells (10,5)=20 and (11,5)=40 after warping
        let mut hs = set(&[(30, 5, 20.0), (51, 5, 40.0)]);
        let g = detect_occlusions(&mut hs, 60, 10, &OcclusionParams::default()).unwrap();
        assert_eq!(g.get(10, 5), Some(20.0));
        assert_eq!(g.get(11, 5), Some(40.0));
        // 40 − 20 − 2·(0.4375·1 + 0.5625·0) = 19.125 > 1
        assert!(hs.entries()[0].occluded);
        assert!(!hs.entries()[1].occluded);
    }

    #[test]
    fn equal_disparities_never_occlude() {
        let mut hs = set(&[(20, 3, 7.0), (21, 3, 7.0), (22, 4, 7.0)]);
        detect_occlusions(&mut hs, 40, 10, &OcclusionParams::default()).unwrap();
        assert!(hs.iter().all(|h| !h.occluded));
    }

    #[test]
    fn isolated_hint_visible() {
        let mut hs = set(&[(20, 3, 70.0)]);
        detect_occlusions(&mut hs, 40, 10, &OcclusionParams::default()).unwrap();
        assert!(!hs.entries()[0].occluded);
    }

    #[test]
    fn collision_loser_is_occluded() {
        let mut hs = set(&[(10, 5, 4.0), (7, 5, 1.0)]);
        detect_occlusions(&mut hs, 20, 10, &OcclusionParams::default()).unwrap();
        assert!(!hs.entries()[0].occluded);
        assert!(hs.entries()[1].occluded);
    }

    #[test]
    fn neighbor_outside_window_ignored() {
        // columns 10 and 15 differ by 5 > rx/2 = 4
        let mut hs = set(&[(30, 5, 20.0), (55, 5, 40.0)]);
        detect_occlusions(&mut hs, 60, 10, &OcclusionParams::default()).unwrap();
        assert!(!hs.entries()[0].occluded);
    }

    #[test]
    fn params_validation() {
        let mut p = OcclusionParams::default();
        p.rx = 4;
        assert!(p.validate().is_err());
        p = OcclusionParams::default();
        p.gamma = 1.5;
        assert!(p.validate().is_err());
    }

    fn arb_hints() -> impl Strategy<Value = Vec<(usize, usize, f64)>> {
        proptest::collection::btree_map((0usize..40, 0usize..12), 0u32..60, 0..80).prop_map(|m| {
            m.into_iter()
                .map(|((x, y), d)| (x, y, d as f64 * 0.5))
                .collect()
        })
    }

    fn flags(hs: &HintSet) -> std::collections::BTreeMap<(usize, usize), bool> {
        hs.iter().map(|h| ((h.x, h.y), h.occluded)).collect()
    }

    proptest! {
        #[test]
        fn order_independent(raw in arb_hints(), seed in any::<u64>()) {
            let mut a = set(&raw);
            let mut shuffled = raw.clone();
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let mut b = set(&shuffled);
            let p = OcclusionParams::default();
            detect_occlusions(&mut a, 40, 12, &p).unwrap();
            detect_occlusions(&mut b, 40, 12, &p).unwrap();
            prop_assert_eq!(flags(&a), flags(&b));
        }

        #[test]
        fn raising_t_shrinks_occluded_set(raw in arb_hints(), t1 in 0.0f64..10.0, dt in 0.0f64..10.0) {
            let mut lo = set(&raw);
            let mut hi = set(&raw);
            let p1 = OcclusionParams { t: t1, ..Default::default() };
            let p2 = OcclusionParams { t: t1 + dt, ..Default::default() };
            detect_occlusions(&mut lo, 40, 12, &p1).unwrap();
            detect_occlusions(&mut hi, 40, 12, &p2).unwrap();
            for (a, b) in lo.iter().zip(hi.iter()) {
                prop_assert!(!b.occluded || a.occluded);
            }
        }
    }
}
