//! Virtual pattern projection for passive stereo.
//!
//! Sparse, trusted disparity hints are turned into identical synthetic
//! patterns painted at corresponding pixels of a rectified pair, so that a
//! downstream matcher sees distinctive texture exactly where the hints say the
//! correspondences are. The crate bundles everything needed to run the
//! hint → augment → match → score loop:
//!
//! - [`imgio`]: PNG / PFM / 16-bit PNG disparity / hint CSV / calibration I/O
//! - [`geometry`]: depth ↔ disparity and epipolar correspondence
//! - [`occlusion`]: warp-grid heuristic flagging hints occluded in the target view
//! - [`patterning`]: the projection engine (random and histogram patterns,
//!   patches, alpha blending, sub-pixel splatting, occlusion strategies)
//! - [`sgm`]: census + semi-global matching with adaptive P2, LR check,
//!   speckle filter, background fill and cost-volume guidance
//! - [`eval`]: hint sampling from ground truth and bad-τ metrics
//! - [`pipeline`]: the per-mode hint → augment → match composition
//! - [`synth`]: layered synthetic scenes with exact ground truth
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (default); see [`Execution`].

pub mod error;
pub mod eval;
pub mod geometry;
pub mod imgio;
pub mod occlusion;
mod par;
pub mod patterning;
pub mod pipeline;
pub mod sgm;
pub mod synth;
mod types;

pub use error::{Error, Result};
pub use par::Execution;
pub use types::{Calibration, DisparityMap, Hint, HintSet, ImageBuffer, INVALID};
