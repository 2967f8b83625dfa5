//! Implementations of the six subcommands.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde::Serialize;

use ahsc_core::convexity::{
    covering_bound, landscape_slice, mu_max_with, oracle_max, sharpness, CoveringBoundInput,
    ProxyDenominator, SharpnessParams,
};
use ahsc_core::data::{load_csv, synthetic_blobs, Dataset};
use ahsc_core::hpo::{
    ahsc_with, architecture, random_search, sample_configs, HyperSpace, MetricKind, SearchResult,
};
use ahsc_core::metrics::spearman;
use ahsc_core::nn::{forward, init_model, loss_ce, train, Model};
use ahsc_core::seed::derive_seed;
use ahsc_core::theoryverify::{run_default_suite, run_problem_checks, CheckReport, QuadraticProblem};
use ahsc_core::Error as CoreError;

use crate::records::{
    metric_name, BestRecord, CheckRow, ConfigRecord, HyperParams, LandscapeMeta, OracleRow,
    OracleSummary,
};
use crate::{
    BoundArgs, Command, DataArgs, LandscapeArgs, OracleArgs, ProblemSpec, RandomSearchArgs,
    SearchArgs, VerifyArgs,
};

// Derivation streams for seeds the CLI owns. The search library reserves
// streams at and above 2^32 for itself; these live higher up, and the
// per-config streams (small integers) mirror the library's probe layout.
const STREAM_DATA: u64 = 101 << 36;
const STREAM_SAMPLE: u64 = 102 << 36;
const STREAM_GRID: u64 = 103 << 36;
const STREAM_SHARPNESS: u64 = 104 << 36;
const CFG_INIT: u64 = 1;
const CFG_TRAIN: u64 = 2;

/// Fixed seed for `--h psd:N` problems and for the check sample points, so
/// `verify-theory` output is reproducible with no seed flag.
const VERIFY_PSD_SEED: u64 = 2024;
const VERIFY_POINT_SEED: u64 = 0x7E09;

/// Anything a command can fail with, mapped onto the documented exit codes:
/// 2 usage, 3 data, 4 all-discarded, 5 numeric/size.
pub enum CmdError {
    Usage(String),
    Io { path: PathBuf, source: io::Error },
    Core(CoreError),
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> Self {
        CmdError::Core(e)
    }
}

impl CmdError {
    /// Prints the error to stderr and yields the process exit code.
    pub fn report(self) -> ExitCode {
        match self {
            CmdError::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            CmdError::Io { path, source } => {
                eprintln!("error: {}: {source}", path.display());
                ExitCode::from(3)
            }
            CmdError::Core(e) => {
                eprintln!("error: {e}");
                ExitCode::from(core_exit(&e))
            }
        }
    }
}

fn core_exit(e: &CoreError) -> u8 {
    use CoreError::*;
    match e {
        LoadIo { .. }
        | LoadEmptyBody { .. }
        | LoadRaggedRow { .. }
        | LoadBadCell { .. }
        | LoadNonFinite { .. }
        | LoadNoLabelColumn { .. }
        | Data(_)
        | Label { .. } => 3,
        AllDiscarded { .. } => 4,
        Numeric(_) | Size { .. } | Shape(_) | Architecture(_) | Degenerate(_)
        | NotStronglyConvex => 5,
    }
}

pub fn run(command: Command) -> Result<ExitCode, CmdError> {
    match command {
        Command::Search(args) => run_search(args),
        Command::RandomSearch(args) => run_random_search(args),
        Command::OracleValidate(args) => run_oracle_validate(args),
        Command::Landscape(args) => run_landscape(args),
        Command::Bound(args) => run_bound(args),
        Command::VerifyTheory(args) => run_verify_theory(args),
    }
}

/// JSON-lines destination: `--out` file or stdout.
struct Sink {
    inner: Box<dyn Write>,
    path: Option<PathBuf>,
}

impl Sink {
    fn create(out: Option<&Path>) -> Result<Self, CmdError> {
        match out {
            Some(path) => {
                let file = File::create(path).map_err(|source| CmdError::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
                Ok(Self {
                    inner: Box::new(BufWriter::new(file)),
                    path: Some(path.to_path_buf()),
                })
            }
            None => Ok(Self {
                inner: Box::new(io::stdout()),
                path: None,
            }),
        }
    }

    fn emit<T: Serialize>(&mut self, record: &T) -> Result<(), CmdError> {
        let line = serde_json::to_string(record).expect("records serialize cleanly");
        self.inner
            .write_all(line.as_bytes())
            .and_then(|()| self.inner.write_all(b"\n"))
            .map_err(|source| self.io_error(source))
    }

    fn finish(mut self) -> Result<(), CmdError> {
        self.inner.flush().map_err(|source| self.io_error(source))
    }

    fn io_error(&self, source: io::Error) -> CmdError {
        CmdError::Io {
            path: self
                .path
                .clone()
                .unwrap_or_else(|| PathBuf::from("<stdout>")),
            source,
        }
    }
}

fn load_dataset(args: &DataArgs, seed: u64) -> Result<Dataset, CmdError> {
    if let Some(path) = &args.data {
        Ok(load_csv(path, args.label_column.as_deref())?)
    } else if let Some(spec) = &args.synthetic {
        if spec.per_class == 0 || spec.classes == 0 || spec.dim == 0 {
            return Err(CmdError::Usage(
                "synthetic blob counts must all be positive".into(),
            ));
        }
        Ok(synthetic_blobs(
            spec.per_class,
            spec.classes,
            spec.dim,
            spec.separation,
            spec.noise,
            derive_seed(seed, STREAM_DATA),
        )?)
    } else {
        unreachable!("argument parser enforces --data xor --synthetic")
    }
}

fn denominator(col_norm: bool) -> ProxyDenominator {
    if col_norm {
        ProxyDenominator::ColumnMin
    } else {
        ProxyDenominator::FullMatrix
    }
}

fn run_search(args: SearchArgs) -> Result<ExitCode, CmdError> {
    if args.n2 == 0 || args.n1 < args.n2 {
        return Err(CmdError::Usage(format!(
            "--n1 ({}) must be >= --n2 ({}) and --n2 at least 1",
            args.n1, args.n2
        )));
    }
    if args.epochs == 0 {
        return Err(CmdError::Usage("--epochs must be at least 1".into()));
    }
    let data = load_dataset(&args.data, args.seed)?;
    let space = HyperSpace::default();
    let result = ahsc_with(
        &space,
        &data,
        args.n1,
        args.n2,
        args.seed,
        args.epochs,
        args.metric,
        denominator(args.col_norm),
    )?;

    let mut sink = Sink::create(args.out.as_deref())?;
    emit_probe_records(&mut sink, &result, args.timings)?;
    emit_full_records(&mut sink, &result, args.timings, true)?;
    emit_best_record(&mut sink, &result, args.metric)?;
    sink.finish()?;
    summarize(&result, args.metric);
    Ok(ExitCode::SUCCESS)
}

fn run_random_search(args: RandomSearchArgs) -> Result<ExitCode, CmdError> {
    if args.n == 0 {
        return Err(CmdError::Usage("--n must be at least 1".into()));
    }
    if args.epochs == 0 {
        return Err(CmdError::Usage("--epochs must be at least 1".into()));
    }
    let data = load_dataset(&args.data, args.seed)?;
    let space = HyperSpace::default();
    let result = random_search(&space, &data, args.n, args.seed, args.epochs, args.metric)?;

    let mut sink = Sink::create(args.out.as_deref())?;
    emit_full_records(&mut sink, &result, args.timings, false)?;
    emit_best_record(&mut sink, &result, args.metric)?;
    sink.finish()?;
    summarize(&result, args.metric);
    Ok(ExitCode::SUCCESS)
}

/// One record per probed config, in config-id order. The probe phase is
/// exactly one epoch by contract.
fn emit_probe_records(sink: &mut Sink, result: &SearchResult, timings: bool) -> Result<(), CmdError> {
    for o in &result.outcomes {
        let record = o.record.as_ref().expect("search outcomes carry probe records");
        sink.emit(&ConfigRecord {
            config_id: o.config.config_id,
            hyperparams: HyperParams::from(&o.config),
            mu_max: Some(record.mu_max),
            discarded: record.discarded,
            full_score: None,
            epochs_used: 1,
            wall_ms: timings.then_some(o.wall_ms),
        })?;
    }
    Ok(())
}

/// One record per fully trained config. When the run probed first, the
/// probe epoch is deducted so the log's epoch column sums to the budget.
fn emit_full_records(
    sink: &mut Sink,
    result: &SearchResult,
    timings: bool,
    probed: bool,
) -> Result<(), CmdError> {
    for o in &result.outcomes {
        let Some(score) = o.full_score else { continue };
        let (mu, discarded) = match &o.record {
            Some(r) => (Some(r.mu_max), r.discarded),
            None => (None, false),
        };
        sink.emit(&ConfigRecord {
            config_id: o.config.config_id,
            hyperparams: HyperParams::from(&o.config),
            mu_max: mu,
            discarded,
            full_score: Some(score),
            epochs_used: o.epochs_used - usize::from(probed),
            wall_ms: timings.then_some(o.wall_ms),
        })?;
    }
    Ok(())
}

fn emit_best_record(
    sink: &mut Sink,
    result: &SearchResult,
    metric: MetricKind,
) -> Result<(), CmdError> {
    sink.emit(&BestRecord {
        best_config_id: result.best.config.config_id,
        hyperparams: HyperParams::from(&result.best.config),
        score: result.best.score,
        metric: metric_name(metric),
        probe_epochs: result.probe_epochs,
        full_epochs: result.full_epochs,
        total_epochs: result.total_epochs(),
    })
}

fn summarize(result: &SearchResult, metric: MetricKind) {
    let best = &result.best;
    eprintln!(
        "best config {}: depth={} width={} batch_size={} learning_rate={:.3e}",
        best.config.config_id,
        best.config.depth,
        best.config.width,
        best.config.batch_size,
        best.config.learning_rate,
    );
    eprintln!("{} = {:.4} on the held-out split", metric_name(metric), best.score);
    eprintln!(
        "budget: {} probe epochs + {} full epochs = {} total",
        result.probe_epochs,
        result.full_epochs,
        result.total_epochs()
    );
}

fn run_oracle_validate(args: OracleArgs) -> Result<ExitCode, CmdError> {
    if args.n == 0 {
        return Err(CmdError::Usage("--n must be at least 1".into()));
    }
    if args.oracle_eps <= 0.0 || !args.oracle_eps.is_finite() {
        return Err(CmdError::Usage(format!(
            "--oracle-eps must be positive and finite, got {}",
            args.oracle_eps
        )));
    }
    if args.max_width == 0 {
        return Err(CmdError::Usage("--max-width must be at least 1".into()));
    }
    let data = load_dataset(&args.data, args.seed)?;
    let denom = denominator(args.col_norm);
    // Narrow the sampled widths so class_count x width stays inside the
    // oracle's differentiable-parameter budget; an oversized --max-width
    // surfaces as the oracle's own size error.
    let space = HyperSpace {
        width: (16.min(args.max_width), args.max_width),
        ..Default::default()
    };
    let configs = sample_configs(&space, args.n, derive_seed(args.seed, STREAM_SAMPLE))?;

    let mut sink = Sink::create(args.out.as_deref())?;
    let mut proxies = Vec::new();
    let mut oracles = Vec::new();
    let mut discarded = 0usize;
    for cfg in &configs {
        let cfg_seed = derive_seed(args.seed, cfg.config_id);
        let dims = architecture(data.n_features(), data.n_classes, cfg);
        let model = init_model(&dims, derive_seed(cfg_seed, CFG_INIT))?;
        let (probed, _) = train(model, &data, cfg, 1, false, derive_seed(cfg_seed, CFG_TRAIN))?;
        let record = mu_max_with(&probed, &data, cfg.batch_size, denom)?;
        if record.discarded {
            discarded += 1;
            log::warn!(
                "config {} discarded (mu_max = {}), skipping oracle",
                cfg.config_id,
                record.mu_max
            );
            continue;
        }
        let oracle = oracle_max(&probed, &data, cfg.batch_size, args.oracle_eps)?;
        sink.emit(&OracleRow {
            config_id: cfg.config_id,
            hyperparams: HyperParams::from(cfg),
            mu_max: record.mu_max,
            oracle,
        })?;
        proxies.push(record.mu_max);
        oracles.push(oracle);
    }

    let rho = spearman(&proxies, &oracles)?;
    sink.emit(&OracleSummary {
        spearman: rho,
        count: proxies.len(),
        sampled: args.n,
    })?;
    sink.finish()?;
    eprintln!(
        "spearman rho = {rho:.4} over {} configs ({discarded} discarded)",
        proxies.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn run_landscape(args: LandscapeArgs) -> Result<ExitCode, CmdError> {
    if args.grid_n < 3 || args.grid_n.is_multiple_of(2) {
        return Err(CmdError::Usage(format!(
            "--grid-n must be odd and at least 3, got {}",
            args.grid_n
        )));
    }
    if args.span <= 0.0 || !args.span.is_finite() {
        return Err(CmdError::Usage(format!(
            "--span must be positive and finite, got {}",
            args.span
        )));
    }
    if args.depth == 0 || args.width == 0 || args.batch_size == 0 {
        return Err(CmdError::Usage(
            "--depth, --width, and --batch-size must all be at least 1".into(),
        ));
    }
    if args.learning_rate <= 0.0 || !args.learning_rate.is_finite() {
        return Err(CmdError::Usage(format!(
            "--learning-rate must be positive and finite, got {}",
            args.learning_rate
        )));
    }
    let data = load_dataset(&args.data, args.seed)?;
    let cfg = ahsc_core::hpo::HyperConfig {
        config_id: 0,
        depth: args.depth,
        width: args.width,
        batch_size: args.batch_size,
        learning_rate: args.learning_rate,
    };
    let dims = architecture(data.n_features(), data.n_classes, &cfg);
    let model = init_model(&dims, derive_seed(args.seed, CFG_INIT))?;
    let (trained, _) = train(
        model,
        &data,
        &cfg,
        args.epochs,
        false,
        derive_seed(args.seed, CFG_TRAIN),
    )?;

    let grid = landscape_slice(
        &trained,
        &data,
        args.grid_n,
        args.span,
        derive_seed(args.seed, STREAM_GRID),
    )?;
    let mut csv = String::from("x_index,y_index,loss\n");
    for ix in 0..grid.grid_n {
        for iy in 0..grid.grid_n {
            use std::fmt::Write as _;
            let _ = writeln!(csv, "{ix},{iy},{}", grid.losses.get(ix, iy));
        }
    }
    std::fs::write(&args.out, csv).map_err(|source| CmdError::Io {
        path: args.out.clone(),
        source,
    })?;

    let record = mu_max_with(&trained, &data, args.batch_size, denominator(args.col_norm))?;
    let zeta = last_layer_sharpness(&trained, &data, derive_seed(args.seed, STREAM_SHARPNESS))?;
    let cache = forward(&trained, &data.features)?;
    let train_loss = loss_ce(cache.probs(), &data.labels)?;

    let meta = LandscapeMeta {
        grid_n: args.grid_n,
        span: args.span,
        seed: args.seed,
        train_loss,
        mu_max: record.mu_max,
        sharpness: zeta,
        sharpness_epsilon: SharpnessParams::default().epsilon,
    };
    let mut meta_path = args.out.clone().into_os_string();
    meta_path.push(".meta.json");
    let meta_path = PathBuf::from(meta_path);
    let meta_line = serde_json::to_string(&meta).expect("meta serializes cleanly");
    std::fs::write(&meta_path, meta_line + "\n").map_err(|source| CmdError::Io {
        path: meta_path.clone(),
        source,
    })?;

    eprintln!(
        "wrote {n}x{n} grid to {} (sidecar {})",
        args.out.display(),
        meta_path.display(),
        n = args.grid_n,
    );
    Ok(ExitCode::SUCCESS)
}

/// Sharpness restricted to the classifier-head weights: the ascent ball
/// lives in the head's weight space while everything below stays frozen,
/// keeping the finite-difference ascent tractable.
fn last_layer_sharpness(model: &Model, data: &Dataset, seed: u64) -> Result<f64, CmdError> {
    let w0: Vec<f64> = model
        .weights
        .last()
        .expect("trained model has layers")
        .as_slice()
        .to_vec();
    let base = model.clone();
    let features = &data.features;
    let labels = &data.labels;
    let loss = move |w: &[f64]| -> f64 {
        let mut probe = base.clone();
        probe
            .weights
            .last_mut()
            .expect("trained model has layers")
            .as_mut_slice()
            .copy_from_slice(w);
        forward(&probe, features)
            .and_then(|c| loss_ce(c.probs(), labels))
            .unwrap_or(f64::NAN)
    };
    let params = SharpnessParams {
        seed,
        ..Default::default()
    };
    Ok(sharpness(loss, &w0, &params)?)
}

fn run_bound(args: BoundArgs) -> Result<ExitCode, CmdError> {
    let input = CoveringBoundInput::new(args.m, args.t, args.beta, args.log_cover)?;
    println!("{}", covering_bound(&input));
    Ok(ExitCode::SUCCESS)
}

fn run_verify_theory(args: VerifyArgs) -> Result<ExitCode, CmdError> {
    let reports: Vec<CheckReport> = match args.h {
        None => run_default_suite()?,
        Some(spec) => {
            let problem = match spec {
                ProblemSpec::Identity(n) => QuadraticProblem::identity(n),
                ProblemSpec::Diag(entries) => QuadraticProblem::diag(&entries)?,
                ProblemSpec::Psd(n) => QuadraticProblem::random_psd(n, VERIFY_PSD_SEED)?,
            };
            run_problem_checks(&problem, VERIFY_POINT_SEED)?
        }
    };

    let mut sink = Sink::create(args.out.as_deref())?;
    for report in &reports {
        sink.emit(&CheckRow::from(report))?;
    }
    sink.finish()?;

    let failed = reports.iter().filter(|r| !r.pass).count();
    eprintln!("{}/{} checks passed", reports.len() - failed, reports.len());
    if failed > 0 {
        Ok(ExitCode::from(1))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
