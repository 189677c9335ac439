//! Sparse hint sampling from ground truth and the bad-τ / average-error protocol.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{DisparityMap, Hint, HintSet};

/// Draws `round(density · valid)` distinct valid ground-truth pixels without
/// replacement. Hints come back in raster order carrying the ground-truth
/// disparity.
pub fn sample_hints(gt: &DisparityMap, density: f64, seed: u64) -> Result<HintSet> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::Domain(format!("density must lie in [0, 1], got {density}")));
    }
    let w = gt.width();
    let valid: Vec<usize> = gt
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(i, _)| i)
        .collect();
    let n = ((density * valid.len() as f64).round() as usize).min(valid.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, valid.len(), n)
        .into_iter()
        .map(|k| valid[k])
        .collect();
    picked.sort_unstable();
    HintSet::new(
        picked
            .into_iter()
            .map(|i| Hint::new(i % w, i / w, gt.values()[i] as f64))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub bad1: f64,
    pub bad2: f64,
    pub bad3: f64,
    pub bad4: f64,
    /// Mean absolute error over evaluated pixels with a valid prediction.
    pub avg_px: f64,
    pub evaluated_count: usize,
    /// Fraction of evaluated pixels with a valid prediction.
    pub coverage: f64,
}

impl MetricsReport {
    pub fn bad(&self, tau: u32) -> Option<f64> {
        match tau {
            1 => Some(self.bad1),
            2 => Some(self.bad2),
            3 => Some(self.bad3),
            4 => Some(self.bad4),
            _ => None,
        }
    }
}

/// Scores `disp` against `gt` over pixels with valid ground truth (and inside
/// `mask`, when given). An error counts as bad when it is strictly larger
/// than τ. Invalid predictions count as bad for every τ and are left out of
/// the average.
pub fn evaluate(disp: &DisparityMap, gt: &DisparityMap, mask: Option<&[bool]>) -> Result<MetricsReport> {
    if disp.width() != gt.width() || disp.height() != gt.height() {
        return Err(Error::Contract(format!(
            "prediction {}x{} vs ground truth {}x{}",
            disp.width(),
            disp.height(),
            gt.width(),
            gt.height()
        )));
    }
    if let Some(m) = mask {
        if m.len() != gt.values().len() {
            return Err(Error::Contract("evaluation mask has the wrong size".into()));
        }
    }
    let mut bad = [0usize; 4];
    let (mut n, mut n_pred, mut err_sum) = (0usize, 0usize, 0f64);
    for (i, (&p, &g)) in disp.values().iter().zip(gt.values()).enumerate() {
        if !g.is_finite() || mask.is_some_and(|m| !m[i]) {
            continue;
        }
        n += 1;
        if !p.is_finite() {
            bad.iter_mut().for_each(|b| *b += 1);
            continue;
        }
        let e = (p as f64 - g as f64).abs();
        n_pred += 1;
        err_sum += e;
        for (tau, b) in bad.iter_mut().enumerate() {
            if e > (tau + 1) as f64 {
                *b += 1;
            }
        }
    }
    let pct = |c: usize| if n == 0 { 0.0 } else { 100.0 * c as f64 / n as f64 };
    Ok(MetricsReport {
        bad1: pct(bad[0]),
        bad2: pct(bad[1]),
        bad3: pct(bad[2]),
        bad4: pct(bad[3]),
        avg_px: if n_pred == 0 { 0.0 } else { err_sum / n_pred as f64 },
        evaluated_count: n,
        coverage: if n == 0 { 0.0 } else { n_pred as f64 / n as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::INVALID;
    use proptest::prelude::*;

    fn row(v: &[f32]) -> DisparityMap {
        DisparityMap::from_values(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn hand_counted_example() {
        let r = evaluate(&row(&[2.0, 2.0, 2.0]), &row(&[0.0, 1.0, 2.0]), None).unwrap();
        assert!((r.bad1 - 100.0 / 3.0).abs() < 1e-9);
        assert_eq!(r.bad2, 0.0);
        assert_eq!(r.avg_px, 1.0);
        assert_eq!(r.evaluated_count, 3);
    }

    #[test]
    fn identity_and_all_invalid() {
        let gt = row(&[1.0, 5.0, INVALID, 9.0]);
        let r = evaluate(&gt, &gt, None).unwrap();
        assert_eq!((r.bad1, r.bad4, r.avg_px, r.evaluated_count), (0.0, 0.0, 0.0, 3));
        let none = row(&[INVALID; 4]);
        let r = evaluate(&none, &gt, None).unwrap();
        assert_eq!((r.bad1, r.bad2, r.bad3, r.bad4), (100.0, 100.0, 100.0, 100.0));
        assert_eq!(r.coverage, 0.0);
    }

    #[test]
    fn mask_and_dimension_checks() {
        let gt = row(&[1.0, 5.0]);
        let pred = row(&[1.0, 0.0]);
        let r = evaluate(&pred, &gt, Some(&[true, false])).unwrap();
        assert_eq!((r.bad1, r.evaluated_count), (0.0, 1));
        assert!(evaluate(&row(&[1.0]), &gt, None).is_err());
    }

    #[test]
    fn sampling_counts() {
        let gt = DisparityMap::from_fn(40, 25, |x, y| (x + y) as f32);
        assert!(sample_hints(&gt, 0.0, 1).unwrap().is_empty());
        assert_eq!(sample_hints(&gt, 1.0, 1).unwrap().len(), 1000);
        let hs = sample_hints(&gt, 0.05, 1).unwrap();
        assert_eq!(hs.len(), 50);
        for h in &hs {
            assert_eq!(h.d, gt.raw(h.x, h.y) as f64);
        }
        assert!(sample_hints(&gt, 1.5, 1).is_err());
        assert!(sample_hints(&gt, -0.1, 1).is_err());
    }

    #[test]
    fn sampling_skips_invalid_and_is_seeded() {
        let gt = DisparityMap::from_fn(50, 50, |x, _| if x % 2 == 0 { 3.0 } else { INVALID });
        let a = sample_hints(&gt, 0.05, 7).unwrap();
        assert_eq!(a.len(), 63);
        assert!(a.iter().all(|h| h.x % 2 == 0));
        assert_eq!(a, sample_hints(&gt, 0.05, 7).unwrap());
        assert_ne!(a, sample_hints(&gt, 0.05, 8).unwrap());
    }

    #[test]
    fn independent_seeds_overlap_like_chance() {
        let gt = DisparityMap::from_fn(200, 200, |_, _| 1.0);
        let mut total = 0usize;
        let trials = 20;
        for s in 0..trials {
            let a: std::collections::HashSet<_> =
                sample_hints(&gt, 0.05, 2 * s).unwrap().iter().map(|h| (h.x, h.y)).collect();
            let b = sample_hints(&gt, 0.05, 2 * s + 1).unwrap();
            total += b.iter().filter(|h| a.contains(&(h.x, h.y))).count();
        }
        // expectation: 2000 · 0.05 = 100 shared per trial
        let mean = total as f64 / trials as f64;
        assert!((mean - 100.0).abs() < 15.0, "mean overlap {mean}");
    }

    proptest! {
        #[test]
        fn bad_monotone_and_permutation_invariant(
            pairs in proptest::collection::vec((0.0f32..20.0, prop_oneof![1 => Just(INVALID), 4 => 0.0f32..20.0]), 1..60),
            rot in 0usize..60,
        ) {
            let p: Vec<f32> = pairs.iter().map(|x| x.0).collect();
            let g: Vec<f32> = pairs.iter().map(|x| x.1).collect();
            let r = evaluate(&row(&p), &row(&g), None).unwrap();
            prop_assert!(r.bad1 >= r.bad2 && r.bad2 >= r.bad3 && r.bad3 >= r.bad4);
            prop_assert!((0.0..=100.0).contains(&r.bad1));
            let k = rot % pairs.len();
            let (mut p2, mut g2) = (p.clone(), g.clone());
            p2.rotate_left(k);
            g2.rotate_left(k);
            let r2 = evaluate(&row(&p2), &row(&g2), None).unwrap();
            prop_assert_eq!(r.bad1, r2.bad1);
            prop_assert_eq!(r.bad2, r2.bad2);
            prop_assert!((r.avg_px - r2.avg_px).abs() < 1e-9);
        }
    }
}
