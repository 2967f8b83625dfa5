//! `ahsc` — hyper-parameter search guided by a strong-convexity proxy of
//! the loss landscape, plus the diagnostics around it.
//!
//! Machine-readable output is JSON-lines on stdout (or `--out`); human
//! summaries and warnings go to stderr. Every command is deterministic
//! given its flags: wall-clock timings are only recorded behind an explicit
//! opt-in flag.

mod commands;
mod records;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ahsc_core::hpo::MetricKind;

#[derive(Parser)]
#[command(
    name = "ahsc",
    version,
    about = "Rank network configurations by an analytic curvature proxy, then train the promising few"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Probe N1 configs for one epoch, rank by proxy, fully train the N2
    /// lowest, report the best on a held-out split.
    Search(SearchArgs),
    /// Baseline: fully train every sampled config, no probing.
    RandomSearch(RandomSearchArgs),
    /// Pair the probe-time proxy with the finite-difference last-layer
    /// Hessian oracle over the same mini-batches and report Spearman rank
    /// correlation.
    OracleValidate(OracleArgs),
    /// Train one model, export a filter-normalized 2-D loss grid as CSV
    /// plus a metadata sidecar with its proxy and sharpness values.
    Landscape(LandscapeArgs),
    /// Evaluate the mini-batch deviation tail bound
    /// min(1, exp(-m t^2 / (18 beta^2) + log_cover)).
    Bound(BoundArgs),
    /// Run the strong-convexity inequality checks on known quadratics and
    /// emit one JSON report per check; exits nonzero if any fails.
    VerifyTheory(VerifyArgs),
}

/// Where training data comes from: a CSV file or a synthetic generator.
#[derive(Args)]
pub struct DataArgs {
    /// CSV file with a header row; labels in the last column unless
    /// --label-column names one. String labels are mapped by first
    /// appearance.
    #[arg(
        long,
        value_name = "PATH",
        conflicts_with = "synthetic",
        required_unless_present = "synthetic"
    )]
    pub data: Option<PathBuf>,

    /// Synthetic Gaussian blobs: `blobs:PER_CLASS,CLASSES,DIM,SEP,NOISE`
    /// (e.g. `blobs:100,3,4,4.0,1.0`); seeded from --seed.
    #[arg(long, value_name = "SPEC")]
    pub synthetic: Option<SyntheticSpec>,

    /// Header name of the label column (default: last column).
    #[arg(long, value_name = "NAME", conflicts_with = "synthetic")]
    pub label_column: Option<String>,
}

/// Parsed form of `blobs:PER_CLASS,CLASSES,DIM,SEP,NOISE`.
#[derive(Clone, Debug)]
pub struct SyntheticSpec {
    pub per_class: usize,
    pub classes: usize,
    pub dim: usize,
    pub separation: f64,
    pub noise: f64,
}

impl std::str::FromStr for SyntheticSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s
            .strip_prefix("blobs:")
            .ok_or_else(|| format!("unknown synthetic family in '{s}', expected 'blobs:...'"))?;
        let parts: Vec<&str> = body.split(',').collect();
        if parts.len() != 5 {
            return Err(format!(
                "expected blobs:PER_CLASS,CLASSES,DIM,SEP,NOISE, got '{s}'"
            ));
        }
        let parse_int = |p: &str, what: &str| {
            p.parse::<usize>()
                .map_err(|_| format!("bad {what} '{p}' in synthetic spec"))
        };
        let parse_real = |p: &str, what: &str| {
            p.parse::<f64>()
                .map_err(|_| format!("bad {what} '{p}' in synthetic spec"))
        };
        Ok(Self {
            per_class: parse_int(parts[0], "per-class count")?,
            classes: parse_int(parts[1], "class count")?,
            dim: parse_int(parts[2], "dimension")?,
            separation: parse_real(parts[3], "separation")?,
            noise: parse_real(parts[4], "noise level")?,
        })
    }
}

fn parse_metric(s: &str) -> Result<MetricKind, String> {
    s.parse::<MetricKind>().map_err(|e| e.to_string())
}

#[derive(Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Number of configurations probed for one epoch.
    #[arg(long, default_value_t = 50)]
    pub n1: usize,

    /// Number of lowest-proxy survivors trained to completion (requires
    /// n1 >= n2 >= 1).
    #[arg(long, default_value_t = 10)]
    pub n2: usize,

    /// Master seed; every random choice in the run derives from it.
    #[arg(long)]
    pub seed: u64,

    /// Epoch cap for each full training run (early stopping may use fewer).
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,

    /// Held-out model-selection metric: acc | auc.
    #[arg(long, default_value = "acc", value_parser = parse_metric)]
    pub metric: MetricKind,

    /// Write JSON-lines records here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Use the per-class column-minimum weight norm in the proxy
    /// denominator instead of the full-matrix norm.
    #[arg(long)]
    pub col_norm: bool,

    /// Record wall-clock milliseconds per config (output is then no longer
    /// byte-identical across runs).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Args)]
pub struct RandomSearchArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Number of configurations sampled and fully trained.
    #[arg(long, default_value_t = 50)]
    pub n: usize,

    /// Master seed; shared derivations with `search` so the two commands
    /// sample identical configurations.
    #[arg(long)]
    pub seed: u64,

    /// Epoch cap for each training run.
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,

    /// Held-out model-selection metric: acc | auc.
    #[arg(long, default_value = "acc", value_parser = parse_metric)]
    pub metric: MetricKind,

    /// Write JSON-lines records here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Record wall-clock milliseconds per config.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Number of configurations sampled and probed.
    #[arg(long, default_value_t = 20)]
    pub n: usize,

    /// Master seed.
    #[arg(long)]
    pub seed: u64,

    /// Finite-difference step for the Hessian oracle.
    #[arg(long, default_value_t = 1e-4)]
    pub oracle_eps: f64,

    /// Upper width bound for sampled configs; the oracle differentiates
    /// classes x width parameters and refuses more than 512 of them.
    #[arg(long, default_value_t = 64)]
    pub max_width: usize,

    /// Use the per-class column-minimum proxy denominator.
    #[arg(long)]
    pub col_norm: bool,

    /// Write JSON-lines records here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct LandscapeArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Master seed for training and for the two grid directions.
    #[arg(long)]
    pub seed: u64,

    /// Hidden-layer count of the trained model.
    #[arg(long, default_value_t = 1)]
    pub depth: usize,

    /// Hidden-layer width of the trained model.
    #[arg(long, default_value_t = 32)]
    pub width: usize,

    /// Mini-batch size used for training and the proxy sweep.
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,

    /// Adam learning rate.
    #[arg(long, default_value_t = 1e-2)]
    pub learning_rate: f64,

    /// Training epochs before the grid is evaluated.
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,

    /// Grid resolution per axis; must be odd so the trained model sits on
    /// the center cell.
    #[arg(long, default_value_t = 21)]
    pub grid_n: usize,

    /// Half-extent of the grid in filter-normalized direction units.
    #[arg(long, default_value_t = 1.0)]
    pub span: f64,

    /// Use the per-class column-minimum proxy denominator in the sidecar.
    #[arg(long)]
    pub col_norm: bool,

    /// CSV output path; a `<PATH>.meta.json` sidecar is written next to it.
    #[arg(long, value_name = "PATH", default_value = "landscape.csv")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct BoundArgs {
    /// Mini-batch sample count m.
    #[arg(long)]
    pub m: usize,

    /// Deviation threshold t.
    #[arg(long)]
    pub t: f64,

    /// Uniform bound beta on the function family.
    #[arg(long)]
    pub beta: f64,

    /// Log covering number at scale t/3.
    #[arg(long)]
    pub log_cover: f64,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Problem to check: `identity:N`, `diag:a,b,...`, or `psd:N`.
    /// Omit to run the default three-problem suite.
    #[arg(long, value_name = "SPEC")]
    pub h: Option<ProblemSpec>,

    /// Write JSON-lines reports here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Parsed form of the `--h` quadratic-problem spec.
#[derive(Clone, Debug)]
pub enum ProblemSpec {
    Identity(usize),
    Diag(Vec<f64>),
    Psd(usize),
}

impl std::str::FromStr for ProblemSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| format!("expected KIND:ARGS, got '{s}'"))?;
        match kind {
            "identity" => {
                let n = body
                    .parse::<usize>()
                    .map_err(|_| format!("bad identity size '{body}'"))?;
                if n == 0 {
                    return Err("identity size must be at least 1".into());
                }
                Ok(ProblemSpec::Identity(n))
            }
            "diag" => {
                let entries = body
                    .split(',')
                    .map(|p| {
                        p.parse::<f64>()
                            .map_err(|_| format!("bad diagonal entry '{p}'"))
                    })
                    .collect::<Result<Vec<f64>, String>>()?;
                if entries.is_empty() {
                    return Err("diag needs at least one entry".into());
                }
                Ok(ProblemSpec::Diag(entries))
            }
            "psd" => {
                let n = body
                    .parse::<usize>()
                    .map_err(|_| format!("bad psd size '{body}'"))?;
                if n == 0 {
                    return Err("psd size must be at least 1".into());
                }
                Ok(ProblemSpec::Psd(n))
            }
            other => Err(format!(
                "unknown problem kind '{other}', expected identity | diag | psd"
            )),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => e.report(),
    }
}
