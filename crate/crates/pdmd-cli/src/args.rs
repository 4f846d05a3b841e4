//! Command-line surface. Optional flags may also come from a JSON config file
//! (`--config`, keys named like the flags with underscores), with explicit
//! flags taking precedence; see `commands::Context::lookup`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pdmd::parametric::Variant;
use pdmd::regression::RegressorKind;

#[derive(Parser)]
#[command(
    name = "pdmd",
    version,
    about = "Parametric dynamic mode decomposition: reduced-order forecasting across parameters and time"
)]
pub struct Cli {
    /// Seed driving every randomized step; recorded in outputs
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// JSON file with flag defaults, merged under explicit flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Suppress informational output
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a benchmark snapshot archive
    Generate(GenerateArgs),
    /// Train a parametric DMD model from an archive
    Train(TrainArgs),
    /// Forecast full-order snapshots at a parameter over a label range
    Predict(PredictArgs),
    /// Mean relative error of a model against a truth archive
    Validate(ValidateArgs),
    /// Error sensitivity to the training-set size or the time-window length
    Sensitivity(SensitivityArgs),
    /// Summarize an archive or model directory
    Info(InfoArgs),
}

#[derive(Args)]
pub struct GenerateArgs {
    #[command(subcommand)]
    pub problem: GenerateProblem,
}

#[derive(Subcommand)]
pub enum GenerateProblem {
    /// Closed-form rank-two parametric wave (complex field)
    Toy(ToyArgs),
    /// Nonlinear heat equation on the unit square, finite differences
    Heat(HeatArgs),
    /// Stable oscillations plus one injected divergent mode
    Synthetic(SyntheticArgs),
}

#[derive(Args)]
pub struct ToyArgs {
    /// Spatial samples over [-5, 5]
    #[arg(long)]
    pub space_samples: Option<usize>,
    /// Time samples over [0, 4 pi]
    #[arg(long)]
    pub time_samples: Option<usize>,
    /// Training parameter values, comma separated
    #[arg(long, value_delimiter = ',')]
    pub mus: Option<Vec<f64>>,
    /// Destination archive directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct HeatArgs {
    /// Number of stratified training parameters in [0.01, 10]^2
    #[arg(long)]
    pub params: Option<usize>,
    /// Number of held-out parameters from the central region
    #[arg(long)]
    pub heldout: Option<usize>,
    /// Destination archive for the held-out parameters
    #[arg(long)]
    pub heldout_out: Option<PathBuf>,
    /// Interior grid nodes per axis
    #[arg(long)]
    pub grid: Option<usize>,
    /// Solver substeps per snapshot label
    #[arg(long)]
    pub substeps: Option<usize>,
    /// Forcing amplitude (0 is a smoke-test hook)
    #[arg(long)]
    pub source_amplitude: Option<f64>,
    /// Destination archive directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SyntheticArgs {
    /// State dimension
    #[arg(long)]
    pub state_dim: Option<usize>,
    /// Stable angular frequencies, comma separated
    #[arg(long, value_delimiter = ',')]
    pub freqs: Option<Vec<f64>>,
    /// Modulus of the injected divergent eigenvalue
    #[arg(long)]
    pub rho: Option<f64>,
    /// Relative amplitude of the divergent term
    #[arg(long)]
    pub fraction: Option<f64>,
    /// Angular frequency of the divergent mode
    #[arg(long)]
    pub unstable_freq: Option<f64>,
    /// Number of training snapshots
    #[arg(long)]
    pub time_samples: Option<usize>,
    /// Destination archive directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Training snapshot archive
    pub archive: PathBuf,
    /// monolithic | partitioned
    #[arg(long)]
    pub variant: Option<Variant>,
    /// Retained POD modes n
    #[arg(long)]
    pub pod_rank: Option<usize>,
    /// DMD truncation rank r (0 = keep all numerically nonzero)
    #[arg(long)]
    pub svd_rank: Option<usize>,
    /// Time-delay depth d (1 = plain DMD)
    #[arg(long)]
    pub hodmd_depth: Option<usize>,
    /// Stabilization tolerance: drop eigenvalues farther than this from the
    /// unit circle and normalize the rest
    #[arg(long)]
    pub stabilize: Option<f64>,
    /// Fit amplitudes by least squares over all snapshots instead of the
    /// first snapshot only
    #[arg(long)]
    pub amplitudes_over_all: bool,
    /// Restrict training to an inclusive label window a..b
    #[arg(long)]
    pub train_labels: Option<LabelRange>,
    /// Default online regressor stored with the model
    #[arg(long)]
    pub regressor: Option<RegressorKind>,
    #[arg(long)]
    pub gpr_lengthscale: Option<f64>,
    #[arg(long)]
    pub gpr_noise: Option<f64>,
    /// Destination model directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct PredictArgs {
    /// Trained model directory
    pub model: PathBuf,
    /// Parameter coordinates of the query point
    #[arg(long, num_args = 1.., required = true)]
    pub mu: Vec<f64>,
    /// Inclusive label range a..b to forecast
    #[arg(long)]
    pub labels: LabelRange,
    #[arg(long)]
    pub regressor: Option<RegressorKind>,
    #[arg(long)]
    pub gpr_lengthscale: Option<f64>,
    #[arg(long)]
    pub gpr_noise: Option<f64>,
    /// Output directory: forecast archive plus reduced-coefficient CSV
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ValidateArgs {
    /// Trained model directory
    pub model: PathBuf,
    /// Truth archive covering the requested labels
    pub truth: PathBuf,
    /// Inclusive label range a..b to validate
    #[arg(long)]
    pub labels: LabelRange,
    #[arg(long)]
    pub regressor: Option<RegressorKind>,
    #[arg(long)]
    pub gpr_lengthscale: Option<f64>,
    #[arg(long)]
    pub gpr_noise: Option<f64>,
    /// Scales forecasts before comparison; diagnostics hook
    #[arg(long, hide = true, default_value_t = 1.0)]
    pub forecast_scale: f64,
    /// Output CSV path; the per-parameter breakdown lands next to it
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SensitivityArgs {
    /// Training pool archive
    pub archive: PathBuf,
    /// parameter | time
    #[arg(long)]
    pub mode: SensitivityModeArg,
    /// Held-out truth archive (parameters disjoint from the pool)
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub pod_rank: Option<usize>,
    #[arg(long)]
    pub svd_rank: Option<usize>,
    #[arg(long)]
    pub hodmd_depth: Option<usize>,
    #[arg(long)]
    pub stabilize: Option<f64>,
    /// Regressors to tabulate, comma separated
    #[arg(long, value_delimiter = ',')]
    pub regressors: Option<Vec<RegressorKind>>,
    /// Label the error is probed at (default: last truth label)
    #[arg(long)]
    pub probe_label: Option<i64>,
    /// Inclusive training window a..b (default: the archive's full window)
    #[arg(long)]
    pub train_labels: Option<LabelRange>,
    /// Parameter mode: size of the initial subset
    #[arg(long)]
    pub initial_size: Option<usize>,
    /// Growth steps (parameter mode: +1 member each; time mode: +1 label)
    #[arg(long)]
    pub steps: Option<usize>,
    /// Parameter mode: keep the hull-spanning members in every subset
    #[arg(long)]
    pub anchor_hull: Option<bool>,
    /// Time mode: length of the first training window, in labels
    #[arg(long)]
    pub initial_window: Option<usize>,
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct InfoArgs {
    /// Archive or model directory
    pub path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensitivityModeArg {
    Parameter,
    Time,
}

impl std::str::FromStr for SensitivityModeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "parameter" => Ok(Self::Parameter),
            "time" => Ok(Self::Time),
            other => Err(format!("unknown mode '{other}' (expected parameter|time)")),
        }
    }
}

/// Inclusive integer label range written `a..b` (also accepts a single label).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelRange {
    pub from: i64,
    pub to: i64,
}

impl LabelRange {
    pub fn labels(&self) -> Vec<i64> {
        (self.from..=self.to).collect()
    }

    pub fn len(&self) -> usize {
        (self.to - self.from + 1) as usize
    }
}

impl std::str::FromStr for LabelRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |part: &str| {
            part.trim()
                .parse::<i64>()
                .map_err(|_| format!("'{part}' is not an integer label"))
        };
        let (from, to) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if to < from {
            return Err(format!("label range {from}..{to} is empty"));
        }
        Ok(Self { from, to })
    }
}
