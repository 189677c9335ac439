//! Hint → augment → match composition shared by the CLI and the test suites.

use serde::Serialize;

use crate::error::Result;
use crate::occlusion::{detect_occlusions, OcclusionParams};
use crate::patterning::{apply_vpp, VppConfig};
use crate::sgm::{match_pair, GuideParams, SgmParams};
use crate::types::{DisparityMap, HintSet, ImageBuffer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Baseline,
    Vpp,
    Guided,
    VppGuided,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Baseline, Mode::Vpp, Mode::Guided, Mode::VppGuided];

    pub fn uses_vpp(self) -> bool {
        matches!(self, Mode::Vpp | Mode::VppGuided)
    }

    pub fn uses_guide(self) -> bool {
        matches!(self, Mode::Guided | Mode::VppGuided)
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Vpp => "vpp",
            Mode::Guided => "guided",
            Mode::VppGuided => "vpp+guided",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PipelineParams {
    pub vpp: VppConfig,
    pub occlusion: OcclusionParams,
    pub sgm: SgmParams,
    pub guide: GuideParams,
}

/// Occlusion flags plus augmented pair for a hint set.
pub fn augment(
    left: &ImageBuffer,
    right: &ImageBuffer,
    hints: &HintSet,
    vpp: &VppConfig,
    occlusion: &OcclusionParams,
) -> Result<(HintSet, ImageBuffer, ImageBuffer)> {
    let mut flagged = hints.clone();
    detect_occlusions(&mut flagged, left.width(), left.height(), occlusion)?;
    let (l, r) = apply_vpp(left, right, &flagged, vpp)?;
    Ok((flagged, l, r))
}

pub struct ModeOutput {
    pub left: ImageBuffer,
    pub right: ImageBuffer,
    pub disparity: DisparityMap,
}

/// Runs one mode end to end. Without hints every mode reduces to the baseline.
pub fn run_mode(
    left: &ImageBuffer,
    right: &ImageBuffer,
    hints: &HintSet,
    mode: Mode,
    params: &PipelineParams,
) -> Result<ModeOutput> {
    let (l, r) = if mode.uses_vpp() {
        let (_, l, r) = augment(left, right, hints, &params.vpp, &params.occlusion)?;
        (l, r)
    } else {
        (left.clone(), right.clone())
    };
    let guide = mode.uses_guide().then_some((hints, &params.guide));
    let disparity = match_pair(&l, &r, &params.sgm, guide)?;
    Ok(ModeOutput {
        left: l,
        right: r,
        disparity,
    })
}
