use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use vpp_core::eval::{evaluate, sample_hints, MetricsReport};
use vpp_core::geometry::depth_to_disparity;
use vpp_core::imgio::{
    read_calibration, read_disparity, read_hints, read_image, write_disparity, write_hints,
    write_image, write_json, to_json_string,
};
use vpp_core::pipeline::{augment, run_mode, Mode, PipelineParams};
use vpp_core::sgm::{match_pair, GuideParams};
use vpp_core::{Error, Hint, HintSet, ImageBuffer, Result};

use crate::args::{AugmentArgs, EvalArgs, HintOpts, MatchArgs, PipelineArgs, SampleArgs};

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} does not exist", path.display()),
        )))
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

/// Reads `--hints`, converting metric depth through `--calib` when asked.
fn load_hints(opts: &HintOpts) -> Result<Option<HintSet>> {
    let Some(path) = &opts.hints else {
        return Ok(None);
    };
    let hints = read_hints(path)?;
    if !opts.hints_are_depth {
        return Ok(Some(hints));
    }
    let calib_path = opts
        .calib
        .as_ref()
        .ok_or_else(|| Error::Validation("--hints-are-depth needs --calib".into()))?;
    let calib = read_calibration(calib_path)?.calibration;
    let converted = hints
        .iter()
        .map(|h| Ok(Hint::new(h.x, h.y, depth_to_disparity(h.d, &calib)?)))
        .collect::<Result<Vec<_>>>()?;
    HintSet::new(converted).map(Some)
}

/// Left view with hint pixels colored: green visible, red occluded, blue
/// projecting outside the right view.
pub fn hint_overlay(left: &ImageBuffer, hints: &HintSet) -> ImageBuffer {
    let gray = left.to_gray();
    let mut data = Vec::with_capacity(gray.data().len() * 3);
    for &v in gray.data() {
        data.extend_from_slice(&[v, v, v]);
    }
    let mut out = ImageBuffer::from_raw(gray.width(), gray.height(), 3, data).expect("rgb size");
    for h in hints {
        let color = if h.out_of_target {
            [0, 0, 255]
        } else if h.occluded {
            [255, 0, 0]
        } else {
            [0, 255, 0]
        };
        for (c, v) in color.into_iter().enumerate() {
            out.set(h.x, h.y, c, v);
        }
    }
    out
}

pub fn sample(args: &SampleArgs) -> Result<()> {
    require_file(&args.gt)?;
    let gt = read_disparity(&args.gt)?;
    let hints = sample_hints(&gt, args.density, args.seed)?;
    write_hints(&hints, &args.out)?;
    println!("{}", hints.len());
    Ok(())
}

pub fn augment_cmd(args: &AugmentArgs) -> Result<()> {
    require_file(&args.left)?;
    require_file(&args.right)?;
    let left = read_image(&args.left)?;
    let right = read_image(&args.right)?;
    let hints = load_hints(&args.hint_opts)?.unwrap_or_else(HintSet::empty);
    let params = PipelineParams {
        vpp: args.pattern.vpp_config(args.seed),
        ..PipelineParams::default()
    };
    let (flagged, l, r) = augment(&left, &right, &hints, &params.vpp, &params.occlusion)?;
    fs::create_dir_all(&args.out)?;
    write_image(&l, args.out.join("left.png"))?;
    write_image(&r, args.out.join("right.png"))?;
    if let Some(dir) = &args.debug_dir {
        fs::create_dir_all(dir)?;
        write_image(&hint_overlay(&left, &flagged), dir.join("hints_overlay.png"))?;
    }
    let occluded = flagged.iter().filter(|h| h.occluded).count();
    println!("{} hints, {occluded} occluded", flagged.len());
    Ok(())
}

pub fn match_cmd(args: &MatchArgs) -> Result<()> {
    require_file(&args.left)?;
    require_file(&args.right)?;
    let left = read_image(&args.left)?;
    let right = read_image(&args.right)?;
    let guide_hints = match &args.guide {
        Some(p) => Some(read_hints(p)?),
        None => None,
    };
    let guide = GuideParams::default();
    let disp = match_pair(
        &left,
        &right,
        &args.sgm.params(),
        guide_hints.as_ref().map(|h| (h, &guide)),
    )?;
    write_disparity(&disp, &args.out)
}

#[derive(Serialize)]
struct EvalReport {
    disp: String,
    gt: String,
    metrics: MetricsReport,
}

pub fn eval_cmd(args: &EvalArgs) -> Result<()> {
    require_file(&args.disp)?;
    require_file(&args.gt)?;
    let disp = read_disparity(&args.disp)?;
    let gt = read_disparity(&args.gt)?;
    let report = EvalReport {
        disp: display(&args.disp),
        gt: display(&args.gt),
        metrics: evaluate(&disp, &gt, None)?,
    };
    match &args.out {
        Some(p) => write_json(&report, p),
        None => {
            print!("{}", to_json_string(&report)?);
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct PipelineConfigRecord {
    left: String,
    right: String,
    gt: String,
    hints: Option<String>,
    hints_are_depth: bool,
    densities: Vec<f64>,
    modes: Vec<String>,
    seed: u64,
    params: PipelineParams,
}

#[derive(Serialize)]
struct PipelineRow {
    density: Option<f64>,
    hint_count: usize,
    occluded_hints: usize,
    mode: String,
    metrics: MetricsReport,
}

#[derive(Serialize)]
struct PipelineReport {
    config: PipelineConfigRecord,
    results: Vec<PipelineRow>,
}

fn density_dir(density: Option<f64>) -> String {
    match density {
        Some(d) => format!("density_{d}"),
        None => "hints".into(),
    }
}

pub fn pipeline(args: &PipelineArgs) -> Result<()> {
    for p in [&args.left, &args.right, &args.gt] {
        require_file(p)?;
    }
    let modes = args
        .modes
        .iter()
        .map(|m| {
            Mode::parse(m.trim()).ok_or_else(|| Error::Validation(format!("unknown mode {m:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let left = read_image(&args.left)?;
    let right = read_image(&args.right)?;
    let gt = read_disparity(&args.gt)?;
    let params = PipelineParams {
        vpp: args.pattern.vpp_config(args.seed),
        sgm: args.sgm.params(),
        ..PipelineParams::default()
    };

    let fixed_hints = load_hints(&args.hint_opts)?;
    let densities: Vec<f64> = args.densities.clone().unwrap_or_else(|| vec![args.density]);
    let runs: Vec<(Option<f64>, HintSet)> = match fixed_hints {
        Some(h) => vec![(None, h)],
        None => densities
            .iter()
            .map(|&d| Ok((Some(d), sample_hints(&gt, d, args.seed)?)))
            .collect::<Result<_>>()?,
    };

    fs::create_dir_all(&args.out)?;
    let mut results = Vec::new();
    for (density, hints) in &runs {
        let dir: PathBuf = args.out.join(density_dir(*density));
        fs::create_dir_all(&dir)?;
        write_hints(hints, dir.join("hints.csv"))?;
        let (flagged, _, _) = augment(&left, &right, hints, &params.vpp, &params.occlusion)?;
        if let Some(debug) = &args.debug_dir {
            let ddir = debug.join(density_dir(*density));
            fs::create_dir_all(&ddir)?;
            write_image(&hint_overlay(&left, &flagged), ddir.join("hints_overlay.png"))?;
        }
        for &mode in &modes {
            let out = run_mode(&left, &right, hints, mode, &params)?;
            let mdir = dir.join(mode.name());
            fs::create_dir_all(&mdir)?;
            if mode.uses_vpp() {
                write_image(&out.left, mdir.join("left.png"))?;
                write_image(&out.right, mdir.join("right.png"))?;
            }
            write_disparity(&out.disparity, mdir.join("disparity.pfm"))?;
            let metrics = evaluate(&out.disparity, &gt, None)?;
            println!(
                "{:<12} {:>8} bad1 {:6.2} bad2 {:6.2} bad3 {:6.2} bad4 {:6.2} avg {:6.3}",
                mode.name(),
                density.map(|d| d.to_string()).unwrap_or_else(|| "file".into()),
                metrics.bad1,
                metrics.bad2,
                metrics.bad3,
                metrics.bad4,
                metrics.avg_px
            );
            results.push(PipelineRow {
                density: *density,
                hint_count: hints.len(),
                occluded_hints: flagged.iter().filter(|h| h.occluded).count(),
                mode: mode.name().to_string(),
                metrics,
            });
        }
    }

    let report = PipelineReport {
        config: PipelineConfigRecord {
            left: display(&args.left),
            right: display(&args.right),
            gt: display(&args.gt),
            hints: args.hint_opts.hints.as_deref().map(display),
            hints_are_depth: args.hint_opts.hints_are_depth,
            densities,
            modes: modes.iter().map(|m| m.name().to_string()).collect(),
            seed: args.seed,
            params,
        },
        results,
    };
    write_json(&report, args.out.join("metrics.json"))
}
