use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "bsg",
    version,
    about = "Annealed complexity of bipartite spherical spin glasses"
)]
pub struct Cli {
    /// Worker threads for parallel sections (defaults to all cores).
    #[arg(long, global = true, env = "BSG_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize the complexity functional.
    Complexity(ComplexityArgs),
    /// Tabulate total and minima complexity over a range of thresholds.
    Curve(CurveArgs),
    /// E_inf and the ground-state bound.
    Thresholds(ThresholdArgs),
    /// Sample the limiting Hessian spectral density.
    Density(DensityArgs),
    /// Explicit curves for pure models with gamma = p/(p+q).
    ClosedForm(ClosedFormArgs),
    /// Monte Carlo checks of the limiting predictions at finite N.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Total,
    Minima,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Mixture file: `term p q beta` or `pure p q` statements.
    #[arg(long)]
    pub model: PathBuf,

    /// Fraction of coordinates in the first species, in (0, 1).
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: f64,

    /// Rescale the coefficients to unit norm instead of rejecting them.
    #[arg(long)]
    pub renormalize: bool,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct ComplexityArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long, value_enum, default_value = "total")]
    pub mode: ModeArg,

    /// Energy threshold; omit for the unconstrained problem.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    #[arg(long, default_value_t = -2.2, allow_negative_numbers = true)]
    pub t_min: f64,

    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub t_max: f64,

    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[command(flatten)]
    pub range: RangeArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Field point `u0,u1,u2`.
    #[arg(long, value_parser = parse_list::<3>, allow_hyphen_values = true, default_value = "0,0,0")]
    pub u: [f64; 3],

    #[arg(long, default_value_t = bsg_core::mde::DEFAULT_RESOLUTION)]
    pub resolution: usize,

    #[arg(long, default_value_t = bsg_core::mde::DEFAULT_ETA_MIN)]
    pub eta_min: f64,

    /// Combine two heights to cancel the leading smoothing error.
    #[arg(long)]
    pub richardson: bool,

    /// Sampling window `lo,hi`; defaults to the a-priori support bound
    /// widened by one on each side.
    #[arg(long, value_parser = parse_list::<2>, allow_hyphen_values = true)]
    pub window: Option<[f64; 2]>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ClosedFormArgs {
    /// Degree sum `p + q`.
    #[arg(long)]
    pub s: u64,

    /// Accept `p + q` of 2 or 3, outside the covered models.
    #[arg(long)]
    pub allow_small: bool,

    #[command(flatten)]
    pub range: RangeArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Total dimension; `gamma (n - 2) + 1` must be an integer.
    #[arg(long, default_value_t = 1002)]
    pub n: usize,

    #[arg(long, default_value_t = 5)]
    pub samples: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Dump the eigenvalues of the first sample at each field point to
    /// `<stem>-<k>.csv` next to the report.
    #[arg(long)]
    pub dump_eigenvalues: bool,

    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `K` comma-separated reals.
fn parse_list<const K: usize>(text: &str) -> Result<[f64; K], String> {
    let values = text
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected {K} comma-separated values, got {}", v.len()))
}
