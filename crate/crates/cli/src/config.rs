//! Flag parsing and resolution against an optional JSON config file.
//!
//! Every flag may also be given as a key of the config file (`sigma_range` for
//! `--sigma-range` and so on). A flag on the command line wins over the file,
//! and the file wins over the built-in default.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_LAMBDA: f64 = 8.0;
pub const DEFAULT_EPSILON: f64 = 2.0;
pub const DEFAULT_SIGMA: f64 = 4.0;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_STEPS: usize = 10_000;
pub const DEFAULT_PATHS: usize = 50;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_HORIZON: f64 = 10.0;
pub const DEFAULT_DTS: [f64; 5] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];
pub const DEFAULT_SIGMA_RANGE: &str = "0:8:0.1";

pub const VERIFY_STEPS: usize = 10;
pub const VERIFY_PATHS: usize = 100_000;
pub const VERIFY_SEED: u64 = 7;

#[derive(Parser, Debug)]
#[command(
    name = "milstein",
    version,
    about = "Lyapunov exponents of the Milstein scheme for a rotational linear SDE"
)]
pub struct Cli {
    /// Worker threads; results do not depend on this
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// JSON file supplying values for any flag not given on the command line
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate log|Z_n| along independent paths
    Simulate(SimulateArgs),
    /// Discrete exponent at one step size
    Exponent(ExponentArgs),
    /// Discrete exponents over a list of step sizes, with a log-log order fit
    SweepDt(SweepArgs),
    /// Almost-sure stability boundary in the (σ, ε) plane for fixed λ
    Region(RegionArgs),
    /// Run a verification suite
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Default)]
pub struct ModelArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct OutputArgs {
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// Drift implicitness in [0, 1]; selects the θ-Milstein scheme (requires ε = 0)
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y0: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct EstimatorArgs {
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Gauss–Hermite nodes
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Monte Carlo increments for as-mc
    #[arg(long)]
    pub samples: Option<u64>,
    /// Paths for as-path-slope
    #[arg(long)]
    pub paths: Option<usize>,
    /// Simulated time for as-path-slope
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ExponentArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub dt: Option<f64>,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated step sizes
    #[arg(long, value_delimiter = ',')]
    pub dts: Option<Vec<f64>>,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct RegionArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// start:stop:step, stop inclusive
    #[arg(long)]
    pub sigma_range: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Steps for the closed-form moment check
    #[arg(long)]
    pub steps: Option<usize>,
    /// Paths for the closed-form moment check
    #[arg(long)]
    pub paths: Option<usize>,
    /// Samples for the moment ladder check
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    MsExact,
    AsQuadrature,
    AsMc,
    AsPathSlope,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemmas,
    Moments,
    Closedform,
    All,
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub lambda: Option<f64>,
    pub epsilon: Option<f64>,
    pub sigma: Option<f64>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub paths: Option<usize>,
    pub theta: Option<f64>,
    pub x0: Option<f64>,
    pub y0: Option<f64>,
    pub seed: Option<u64>,
    pub nodes: Option<usize>,
    pub samples: Option<u64>,
    pub horizon: Option<f64>,
    pub method: Option<MethodArg>,
    pub dts: Option<Vec<f64>>,
    pub sigma_range: Option<String>,
    pub suite: Option<Suite>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading config {}", path.display()), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config {
            kind: "invalid_config",
            message: format!("{}: {e}", path.display()),
        })
    }
}

/// Flag value, else config value, else default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

pub fn parse_sigma_range(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::invalid("sigma_range", format!("{text:?}: {why}"));
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(bad("expected start:stop:step"));
    };
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(bad("values must be finite"));
    }
    if step <= 0.0 {
        return Err(bad("step must be positive"));
    }
    if stop < start {
        return Err(bad("stop is below start"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}
