//! JSON-lines record shapes emitted by the commands.
//!
//! Field order is declaration order, so identical runs serialize to
//! byte-identical lines. Wall-clock fields are optional and stay `null`
//! unless timings are explicitly requested, keeping default output
//! reproducible.

use serde::Serialize;

use ahsc_core::hpo::{HyperConfig, MetricKind};
use ahsc_core::theoryverify::CheckReport;

#[derive(Serialize)]
pub struct HyperParams {
    pub depth: usize,
    pub width: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl From<&HyperConfig> for HyperParams {
    fn from(cfg: &HyperConfig) -> Self {
        Self {
            depth: cfg.depth,
            width: cfg.width,
            batch_size: cfg.batch_size,
            learning_rate: cfg.learning_rate,
        }
    }
}

/// One per-configuration record. Probe records carry `full_score: null`;
/// full-training records repeat the config's proxy value and fill the
/// score in.
#[derive(Serialize)]
pub struct ConfigRecord {
    pub config_id: u64,
    pub hyperparams: HyperParams,
    pub mu_max: Option<f64>,
    pub discarded: bool,
    pub full_score: Option<f64>,
    pub epochs_used: usize,
    pub wall_ms: Option<u128>,
}

/// Final summary line of a search run.
#[derive(Serialize)]
pub struct BestRecord {
    pub best_config_id: u64,
    pub hyperparams: HyperParams,
    pub score: f64,
    pub metric: &'static str,
    pub probe_epochs: usize,
    pub full_epochs: usize,
    pub total_epochs: usize,
}

/// Paired proxy/oracle values for one probed configuration.
#[derive(Serialize)]
pub struct OracleRow {
    pub config_id: u64,
    pub hyperparams: HyperParams,
    pub mu_max: f64,
    pub oracle: f64,
}

/// Rank-correlation summary closing an oracle-validation run.
#[derive(Serialize)]
pub struct OracleSummary {
    pub spearman: f64,
    pub count: usize,
    pub sampled: usize,
}

/// Sidecar metadata written next to a landscape grid.
#[derive(Serialize)]
pub struct LandscapeMeta {
    pub grid_n: usize,
    pub span: f64,
    pub seed: u64,
    pub train_loss: f64,
    pub mu_max: f64,
    pub sharpness: f64,
    pub sharpness_epsilon: f64,
}

/// JSON view of a theory-check outcome.
#[derive(Serialize)]
pub struct CheckRow<'a> {
    pub check: &'a str,
    pub problem: &'a str,
    pub points_tested: usize,
    pub max_violation: f64,
    pub slack: f64,
    pub pass: bool,
    pub witness: Option<&'a [f64]>,
}

impl<'a> From<&'a CheckReport> for CheckRow<'a> {
    fn from(r: &'a CheckReport) -> Self {
        Self {
            check: &r.check,
            problem: &r.problem,
            points_tested: r.points_tested,
            max_violation: r.max_violation,
            slack: r.slack,
            pass: r.pass,
            witness: r.witness.as_deref(),
        }
    }
}

pub fn metric_name(metric: MetricKind) -> &'static str {
    match metric {
        MetricKind::Accuracy => "acc",
        MetricKind::MacroAuc => "auc",
    }
}
