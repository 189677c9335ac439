use std::path::PathBuf;

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use vpp_core::patterning::{OcclusionStrategy, Variant, VppConfig};
use vpp_core::sgm::SgmParams;

#[derive(Debug, Parser)]
#[command(name = "vpp", version, about = "Virtual pattern projection for stereo matching")]
#[command(args_override_self = true)]
pub struct Cli {
    /// key=value file with default flag values; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample sparse hints from a ground-truth disparity map.
    Sample(SampleArgs),
    /// Classify occlusions and paint virtual patterns onto a stereo pair.
    Augment(AugmentArgs),
    /// Run the SGM matcher on a (possibly augmented) pair.
    Match(MatchArgs),
    /// Score a disparity map against ground truth.
    Eval(EvalArgs),
    /// Sample, augment or guide, match and score for every mode and density.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PatternArg {
    Random,
    Hist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OcclusionArg {
    No,
    Bkgd,
    Fgd,
}

impl From<OcclusionArg> for OcclusionStrategy {
    fn from(o: OcclusionArg) -> Self {
        match o {
            OcclusionArg::No => OcclusionStrategy::No,
            OcclusionArg::Bkgd => OcclusionStrategy::Bkgd,
            OcclusionArg::Fgd => OcclusionStrategy::Fgd,
        }
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub density: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output hints CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PatternOpts {
    #[arg(long, value_enum, default_value_t = PatternArg::Random)]
    pub pattern: PatternArg,
    #[arg(long, default_value_t = 3, value_parser = clap::builder::PossibleValuesParser::new(["1", "3", "5"]).map(|s| s.parse::<usize>().unwrap()))]
    pub patch: usize,
    /// One color per patch instead of one per pixel.
    #[arg(long)]
    pub uniform_patch: bool,
    #[arg(long, default_value_t = 0.4)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = OcclusionArg::Fgd)]
    pub occlusion: OcclusionArg,
    /// Histogram window length in pixels.
    #[arg(long = "window-L", default_value_t = 64)]
    pub window_l: usize,
}

impl PatternOpts {
    pub fn vpp_config(&self, seed: u64) -> VppConfig {
        VppConfig {
            variant: Variant::from_parts(
                self.pattern == PatternArg::Hist,
                self.patch,
                self.uniform_patch,
            ),
            patch: self.patch,
            alpha: self.alpha,
            occlusion: self.occlusion.into(),
            window_length: self.window_l,
            seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct HintOpts {
    #[arg(long)]
    pub hints: Option<PathBuf>,
    /// Middlebury calib.txt; required with --hints-are-depth.
    #[arg(long)]
    pub calib: Option<PathBuf>,
    /// The `d` column of the hints file holds metric depth, converted with --calib.
    #[arg(long, requires = "calib")]
    pub hints_are_depth: bool,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub left: PathBuf,
    #[arg(long)]
    pub right: PathBuf,
    #[command(flatten)]
    pub hint_opts: HintOpts,
    #[command(flatten)]
    pub pattern: PatternOpts,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for left.png / right.png.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub debug_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SgmOpts {
    #[arg(long, default_value_t = 192)]
    pub max_disp: usize,
    #[arg(long, default_value_t = 8, value_parser = clap::builder::PossibleValuesParser::new(["4", "8"]).map(|s| s.parse::<usize>().unwrap()))]
    pub paths: usize,
}

impl SgmOpts {
    pub fn params(&self) -> SgmParams {
        SgmParams {
            max_disp: self.max_disp,
            paths: self.paths,
            ..SgmParams::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[arg(long)]
    pub left: PathBuf,
    #[arg(long)]
    pub right: PathBuf,
    #[command(flatten)]
    pub sgm: SgmOpts,
    /// Hints CSV used to modulate the cost volume.
    #[arg(long)]
    pub guide: Option<PathBuf>,
    /// Output disparity (.pfm or 16-bit .png).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted disparity (.pfm or 16-bit .png).
    #[arg(long)]
    pub disp: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// Metrics JSON; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub left: PathBuf,
    #[arg(long)]
    pub right: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[command(flatten)]
    pub hint_opts: HintOpts,
    /// Single density, used when --densities is absent.
    #[arg(long, default_value_t = 0.05)]
    pub density: f64,
    /// Comma-separated density sweep, e.g. 0,0.01,0.05.
    #[arg(long, value_delimiter = ',')]
    pub densities: Option<Vec<f64>>,
    /// Comma-separated subset of baseline,vpp,guided,vpp+guided.
    #[arg(long, value_delimiter = ',', default_value = "baseline,vpp,guided,vpp+guided")]
    pub modes: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub pattern: PatternOpts,
    #[command(flatten)]
    pub sgm: SgmOpts,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub debug_dir: Option<PathBuf>,
}
