//! Hyper-parameter search: cheap one-epoch probes scored by the
//! strong-convexity proxy, full training only for the most promising
//! configurations, and a train-everything random-search baseline for cost
//! comparisons.
//!
//! Reproducibility contract: every stochastic step — the validation split,
//! config sampling, per-config initialization and shuffling — draws from a
//! seed derived as `derive_seed(master, stream)`, so results are identical
//! across runs and independent of scheduling order.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convexity::{mu_max_with, ConvexityRecord, ProxyDenominator};
use crate::data::{train_test_split, Dataset};
use crate::error::{Error, Result};
use crate::metrics::{accuracy, auc_macro};
use crate::nn::{forward, init_model, train, Model};
use crate::seed::derive_seed;

/// Inclusive sampling ranges for each hyper-parameter.
///
/// `width` and `batch_size` are drawn log2-uniformly (uniform over the
/// exponent, rounded to the nearest integer in range); `learning_rate` is
/// log10-uniform; `depth` is plain uniform.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperSpace {
    pub depth: (usize, usize),
    pub width: (usize, usize),
    pub batch_size: (usize, usize),
    pub learning_rate: (f64, f64),
}

impl Default for HyperSpace {
    fn default() -> Self {
        Self {
            depth: (1, 4),
            width: (16, 1024),
            batch_size: (4, 256),
            learning_rate: (1e-5, 1.0),
        }
    }
}

impl HyperSpace {
    /// Checks range ordering and positivity of log-sampled fields.
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("depth", self.depth),
            ("width", self.width),
            ("batch_size", self.batch_size),
        ] {
            if lo == 0 || lo > hi {
                return Err(Error::Data(format!(
                    "{name} range [{lo}, {hi}] must satisfy 1 <= lo <= hi"
                )));
            }
        }
        let (lo, hi) = self.learning_rate;
        if lo <= 0.0 || !lo.is_finite() || hi < lo || !hi.is_finite() {
            return Err(Error::Data(format!(
                "learning_rate range [{lo}, {hi}] must satisfy 0 < lo <= hi"
            )));
        }
        Ok(())
    }
}

/// One sampled point of the space. `config_id` is the draw index and doubles
/// as the tie-breaker and per-config seed stream.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperConfig {
    pub config_id: u64,
    pub depth: usize,
    pub width: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

/// Layer dims for a config: `depth` hidden layers of `width` units between
/// input and softmax head.
pub fn architecture(n_features: usize, n_classes: usize, cfg: &HyperConfig) -> Vec<usize> {
    let mut dims = Vec::with_capacity(cfg.depth + 2);
    dims.push(n_features);
    dims.extend(std::iter::repeat_n(cfg.width, cfg.depth));
    dims.push(n_classes);
    dims
}

fn sample_log2_int(rng: &mut ChaCha8Rng, range: (usize, usize)) -> usize {
    let (lo, hi) = range;
    if lo == hi {
        return lo;
    }
    let exp = rng.random_range((lo as f64).log2()..=(hi as f64).log2());
    (exp.exp2().round() as usize).clamp(lo, hi)
}

/// Draws `n` configurations, ids `0..n`, all randomness keyed by `seed`.
pub fn sample_configs(space: &HyperSpace, n: usize, seed: u64) -> Result<Vec<HyperConfig>> {
    space.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lr_lo, lr_hi) = space.learning_rate;
    let (e_lo, e_hi) = (lr_lo.log10(), lr_hi.log10());
    let mut out = Vec::with_capacity(n);
    for config_id in 0..n as u64 {
        let depth = rng.random_range(space.depth.0..=space.depth.1);
        let width = sample_log2_int(&mut rng, space.width);
        let batch_size = sample_log2_int(&mut rng, space.batch_size);
        let learning_rate = if e_lo == e_hi {
            lr_lo
        } else {
            10f64.powf(rng.random_range(e_lo..=e_hi))
        };
        out.push(HyperConfig {
            config_id,
            depth,
            width,
            batch_size,
            learning_rate,
        });
    }
    Ok(out)
}

/// Ids of the `k` smallest scores; ties broken by ascending id, and all ids
/// are returned when there are fewer than `k`.
pub fn lowest_k(scores: &[(u64, f64)], k: usize) -> Vec<u64> {
    let mut sorted: Vec<(u64, f64)> = scores.to_vec();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    sorted.into_iter().take(k).map(|(id, _)| id).collect()
}

/// Held-out metric used to pick the winner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Accuracy,
    MacroAuc,
}

impl MetricKind {
    pub fn evaluate(&self, model: &Model, data: &Dataset) -> Result<f64> {
        let cache = forward(model, &data.features)?;
        match self {
            MetricKind::Accuracy => accuracy(cache.probs(), &data.labels),
            MetricKind::MacroAuc => auc_macro(cache.probs(), &data.labels, data.n_classes),
        }
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "acc" => Ok(MetricKind::Accuracy),
            "auc" => Ok(MetricKind::MacroAuc),
            other => Err(Error::Data(format!(
                "unknown metric '{other}', expected 'acc' or 'auc'"
            ))),
        }
    }
}

/// Everything that happened to one sampled configuration.
#[derive(Debug, Clone)]
pub struct ConfigOutcome {
    pub config: HyperConfig,
    /// Proxy sweep results; `None` for the random-search baseline, which
    /// never probes.
    pub record: Option<ConvexityRecord>,
    /// Held-out metric after full training; `None` if never fully trained.
    pub full_score: Option<f64>,
    /// Epochs actually consumed by this config (probe + full run).
    pub epochs_used: usize,
    /// Wall time spent on this config, in milliseconds.
    pub wall_ms: u128,
}

/// Winning configuration and its held-out score.
#[derive(Debug, Clone)]
pub struct BestConfig {
    pub config: HyperConfig,
    pub score: f64,
}

/// Full account of a search run, including the epoch budget it consumed.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub outcomes: Vec<ConfigOutcome>,
    pub best: BestConfig,
    pub probe_epochs: usize,
    pub full_epochs: usize,
    pub wall_ms: u128,
}

impl SearchResult {
    pub fn total_epochs(&self) -> usize {
        self.probe_epochs + self.full_epochs
    }
}

// Seed streams. Config ids occupy the low range, so the fixed streams start
// above 2^32.
const STREAM_SPLIT: u64 = 1 << 32;
const STREAM_SAMPLE: u64 = 2 << 32;
const CFG_PROBE_INIT: u64 = 1;
const CFG_PROBE_TRAIN: u64 = 2;
const CFG_FULL_INIT: u64 = 3;
const CFG_FULL_TRAIN: u64 = 4;

/// Fraction of the provided data held out for scoring full runs.
const VALIDATION_FRACTION: f64 = 0.2;

fn full_run(
    cfg: &HyperConfig,
    train_set: &Dataset,
    val_set: &Dataset,
    epochs_full: usize,
    metric: MetricKind,
    cfg_seed: u64,
) -> Result<(f64, usize)> {
    let dims = architecture(train_set.n_features(), train_set.n_classes, cfg);
    let model = init_model(&dims, derive_seed(cfg_seed, CFG_FULL_INIT))?;
    let (trained, history) = train(
        model,
        train_set,
        cfg,
        epochs_full,
        true,
        derive_seed(cfg_seed, CFG_FULL_TRAIN),
    )?;
    let score = metric.evaluate(&trained, val_set)?;
    Ok((score, history.len()))
}

fn pick_best(outcomes: &[ConfigOutcome]) -> Result<BestConfig> {
    let mut best: Option<BestConfig> = None;
    for o in outcomes {
        let Some(score) = o.full_score else { continue };
        let better = match &best {
            None => true,
            // Strict > keeps the lowest config_id on ties because outcomes
            // are visited in id order.
            Some(b) => score > b.score,
        };
        if better {
            best = Some(BestConfig {
                config: o.config.clone(),
                score,
            });
        }
    }
    best.ok_or_else(|| Error::Data("no configuration was fully trained".into()))
}

/// Proxy-guided search: probe `n1` sampled configs for one epoch each, rank
/// the survivors by `mu_max`, fully train only the `n2` lowest, and return
/// the best by held-out metric.
///
/// Full runs restart from a fresh seed-derived initialization rather than
/// continuing the probe weights. When every probe is discarded
/// (non-positive proxy) the search fails loudly instead of falling back.
pub fn ahsc(
    space: &HyperSpace,
    data: &Dataset,
    n1: usize,
    n2: usize,
    seed: u64,
    epochs_full: usize,
    metric: MetricKind,
) -> Result<SearchResult> {
    ahsc_with(space, data, n1, n2, seed, epochs_full, metric, ProxyDenominator::FullMatrix)
}

/// [`ahsc`] with an explicit proxy denominator variant.
#[allow(clippy::too_many_arguments)]
pub fn ahsc_with(
    space: &HyperSpace,
    data: &Dataset,
    n1: usize,
    n2: usize,
    seed: u64,
    epochs_full: usize,
    metric: MetricKind,
    denom: ProxyDenominator,
) -> Result<SearchResult> {
    if n2 == 0 || n1 < n2 {
        return Err(Error::Data(format!(
            "need n1 >= n2 >= 1, got n1 = {n1}, n2 = {n2}"
        )));
    }
    if epochs_full == 0 {
        return Err(Error::Data("epochs_full must be at least 1".into()));
    }
    let started = Instant::now();
    let (train_set, val_set) = train_test_split(data, VALIDATION_FRACTION, derive_seed(seed, STREAM_SPLIT))?;
    let configs = sample_configs(space, n1, derive_seed(seed, STREAM_SAMPLE))?;

    let mut outcomes = Vec::with_capacity(n1);
    let mut probe_epochs = 0;
    for cfg in configs {
        let cfg_started = Instant::now();
        let cfg_seed = derive_seed(seed, cfg.config_id);
        let dims = architecture(train_set.n_features(), train_set.n_classes, &cfg);
        let model = init_model(&dims, derive_seed(cfg_seed, CFG_PROBE_INIT))?;
        let (probed, history) = train(
            model,
            &train_set,
            &cfg,
            1,
            false,
            derive_seed(cfg_seed, CFG_PROBE_TRAIN),
        )?;
        let mut record = mu_max_with(&probed, &train_set, cfg.batch_size, denom)?;
        record.config_id = cfg.config_id;
        probe_epochs += history.len();
        outcomes.push(ConfigOutcome {
            config: cfg,
            record: Some(record),
            full_score: None,
            epochs_used: history.len(),
            wall_ms: cfg_started.elapsed().as_millis(),
        });
    }

    let survivors: Vec<(u64, f64)> = outcomes
        .iter()
        .filter(|o| !o.record.as_ref().expect("probe record").discarded)
        .map(|o| (o.config.config_id, o.record.as_ref().expect("probe record").mu_max))
        .collect();
    if survivors.is_empty() {
        return Err(Error::AllDiscarded { sampled: n1 });
    }
    let chosen = lowest_k(&survivors, n2);

    let mut full_epochs = 0;
    for id in chosen {
        let outcome = &mut outcomes[id as usize];
        debug_assert_eq!(outcome.config.config_id, id);
        let cfg_started = Instant::now();
        let cfg_seed = derive_seed(seed, id);
        let (score, epochs) = full_run(
            &outcome.config,
            &train_set,
            &val_set,
            epochs_full,
            metric,
            cfg_seed,
        )?;
        outcome.full_score = Some(score);
        outcome.epochs_used += epochs;
        outcome.wall_ms += cfg_started.elapsed().as_millis();
        full_epochs += epochs;
    }

    let best = pick_best(&outcomes)?;
    Ok(SearchResult {
        outcomes,
        best,
        probe_epochs,
        full_epochs,
        wall_ms: started.elapsed().as_millis(),
    })
}

/// Baseline that fully trains every sampled configuration.
///
/// Shares the seed derivation of [`ahsc`]: with the same master seed it
/// samples the same configs and runs them with identical initializations
/// and shuffles, so epoch budgets are directly comparable.
pub fn random_search(
    space: &HyperSpace,
    data: &Dataset,
    n: usize,
    seed: u64,
    epochs_full: usize,
    metric: MetricKind,
) -> Result<SearchResult> {
    if n == 0 {
        return Err(Error::Data("random search needs n >= 1".into()));
    }
    if epochs_full == 0 {
        return Err(Error::Data("epochs_full must be at least 1".into()));
    }
    let started = Instant::now();
    let (train_set, val_set) = train_test_split(data, VALIDATION_FRACTION, derive_seed(seed, STREAM_SPLIT))?;
    let configs = sample_configs(space, n, derive_seed(seed, STREAM_SAMPLE))?;

    let mut outcomes = Vec::with_capacity(n);
    let mut full_epochs = 0;
    for cfg in configs {
        let cfg_started = Instant::now();
        let cfg_seed = derive_seed(seed, cfg.config_id);
        let (score, epochs) =
            full_run(&cfg, &train_set, &val_set, epochs_full, metric, cfg_seed)?;
        full_epochs += epochs;
        outcomes.push(ConfigOutcome {
            config: cfg,
            record: None,
            full_score: Some(score),
            epochs_used: epochs,
            wall_ms: cfg_started.elapsed().as_millis(),
        });
    }
    let best = pick_best(&outcomes)?;
    Ok(SearchResult {
        outcomes,
        best,
        probe_epochs: 0,
        full_epochs,
        wall_ms: started.elapsed().as_millis(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic_blobs;
    use crate::linalg::Matrix;

    /// Small space that trains fast and never produces dead networks on
    /// blob data.
    fn tiny_space() -> HyperSpace {
        HyperSpace {
            depth: (1, 2),
            width: (4, 16),
            batch_size: (4, 16),
            learning_rate: (1e-3, 1e-1),
        }
    }

    #[test]
    fn sample_zero_is_empty() {
        assert!(sample_configs(&HyperSpace::default(), 0, 1).unwrap().is_empty());
    }

    #[test]
    fn sample_respects_ranges() {
        let space = HyperSpace::default();
        let configs = sample_configs(&space, 10_000, 42).unwrap();
        assert_eq!(configs.len(), 10_000);
        for c in &configs {
            assert!((1..=4).contains(&c.depth));
            assert!((16..=1024).contains(&c.width));
            assert!((4..=256).contains(&c.batch_size));
            assert!(c.learning_rate >= 1e-5 && c.learning_rate <= 1.0);
        }
        // Ids are the draw indices.
        assert_eq!(configs[17].config_id, 17);
    }

    #[test]
    fn sample_lr_median_near_log_center() {
        let configs = sample_configs(&HyperSpace::default(), 10_000, 7).unwrap();
        let mut lrs: Vec<f64> = configs.iter().map(|c| c.learning_rate).collect();
        lrs.sort_by(f64::total_cmp);
        let median = lrs[lrs.len() / 2];
        assert!(
            median >= 10f64.powf(-2.7) && median <= 10f64.powf(-2.3),
            "median {median}"
        );
    }

    #[test]
    fn sample_deterministic() {
        let a = sample_configs(&HyperSpace::default(), 50, 3).unwrap();
        let b = sample_configs(&HyperSpace::default(), 50, 3).unwrap();
        assert_eq!(a, b);
        let c = sample_configs(&HyperSpace::default(), 50, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn space_validation_rejects_nonsense() {
        let s = HyperSpace { depth: (3, 1), ..Default::default() };
        assert!(s.validate().is_err());
        let s = HyperSpace { width: (0, 8), ..Default::default() };
        assert!(s.validate().is_err());
        let s = HyperSpace { learning_rate: (0.0, 1.0), ..Default::default() };
        assert!(s.validate().is_err());
    }

    #[test]
    fn lowest_k_examples() {
        assert_eq!(lowest_k(&[(1, 0.5), (2, 0.2), (3, 0.9)], 2), vec![2, 1]);
        assert_eq!(lowest_k(&[(1, 0.3), (2, 0.3)], 1), vec![1]);
        assert_eq!(
            lowest_k(&[(9, 0.1), (2, 0.4), (5, 0.2)], 10),
            vec![9, 5, 2]
        );
        assert!(lowest_k(&[], 3).is_empty());
    }

    #[test]
    fn architecture_stacks_hidden_layers() {
        let cfg = HyperConfig {
            config_id: 0,
            depth: 3,
            width: 32,
            batch_size: 8,
            learning_rate: 0.01,
        };
        assert_eq!(architecture(5, 4, &cfg), vec![5, 32, 32, 32, 4]);
    }

    #[test]
    fn metric_parsing() {
        assert_eq!("acc".parse::<MetricKind>().unwrap(), MetricKind::Accuracy);
        assert_eq!("auc".parse::<MetricKind>().unwrap(), MetricKind::MacroAuc);
        assert!("f1".parse::<MetricKind>().is_err());
    }

    #[test]
    fn ahsc_runs_and_respects_budget_shape() {
        let data = synthetic_blobs(30, 3, 4, 4.0, 1.0, 11).unwrap();
        let result = ahsc(&tiny_space(), &data, 6, 2, 5, 10, MetricKind::Accuracy).unwrap();
        assert_eq!(result.outcomes.len(), 6);
        assert_eq!(result.probe_epochs, 6);
        let fully_trained = result
            .outcomes
            .iter()
            .filter(|o| o.full_score.is_some())
            .count();
        assert!(fully_trained <= 2);
        assert!(result.full_epochs <= 2 * 10);
        assert!(result.full_epochs >= fully_trained);
        // Every outcome carries a probe record with a consistent discard flag.
        for o in &result.outcomes {
            let rec = o.record.as_ref().unwrap();
            assert_eq!(rec.discarded, rec.mu_max <= 0.0);
            assert_eq!(rec.config_id, o.config.config_id);
        }
    }

    #[test]
    fn ahsc_best_comes_from_lowest_selection() {
        let data = synthetic_blobs(30, 3, 4, 4.0, 1.0, 13).unwrap();
        let result = ahsc(&tiny_space(), &data, 6, 2, 7, 10, MetricKind::Accuracy).unwrap();
        let survivors: Vec<(u64, f64)> = result
            .outcomes
            .iter()
            .filter(|o| !o.record.as_ref().unwrap().discarded)
            .map(|o| (o.config.config_id, o.record.as_ref().unwrap().mu_max))
            .collect();
        let mut chosen = lowest_k(&survivors, 2);
        assert!(chosen.contains(&result.best.config.config_id));
        let scored: Vec<u64> = result
            .outcomes
            .iter()
            .filter(|o| o.full_score.is_some())
            .map(|o| o.config.config_id)
            .collect();
        chosen.sort_unstable();
        assert_eq!(scored, chosen);
    }

    #[test]
    fn ahsc_deterministic_modulo_wall_time() {
        let data = synthetic_blobs(20, 3, 4, 4.0, 1.0, 17).unwrap();
        let a = ahsc(&tiny_space(), &data, 5, 2, 21, 8, MetricKind::Accuracy).unwrap();
        let b = ahsc(&tiny_space(), &data, 5, 2, 21, 8, MetricKind::Accuracy).unwrap();
        assert_eq!(a.probe_epochs, b.probe_epochs);
        assert_eq!(a.full_epochs, b.full_epochs);
        assert_eq!(a.best.config, b.best.config);
        assert_eq!(a.best.score.to_bits(), b.best.score.to_bits());
        for (x, y) in a.outcomes.iter().zip(&b.outcomes) {
            assert_eq!(x.config, y.config);
            assert_eq!(x.full_score.map(f64::to_bits), y.full_score.map(f64::to_bits));
            assert_eq!(
                x.record.as_ref().unwrap().mu_max.to_bits(),
                y.record.as_ref().unwrap().mu_max.to_bits()
            );
            assert_eq!(x.epochs_used, y.epochs_used);
        }
    }

    #[test]
    fn ahsc_equals_exhaustive_when_n1_is_n2() {
        let data = synthetic_blobs(25, 3, 4, 4.0, 1.0, 19).unwrap();
        let exhaustive = random_search(&tiny_space(), &data, 4, 23, 8, MetricKind::Accuracy).unwrap();
        let guided = ahsc(&tiny_space(), &data, 4, 4, 23, 8, MetricKind::Accuracy).unwrap();
        let discards = guided
            .outcomes
            .iter()
            .filter(|o| o.record.as_ref().unwrap().discarded)
            .count();
        assert_eq!(discards, 0, "test premise: no dead networks on blob data");
        assert_eq!(guided.best.config, exhaustive.best.config);
        assert_eq!(guided.best.score.to_bits(), exhaustive.best.score.to_bits());
    }

    #[test]
    fn ahsc_rejects_bad_counts() {
        let data = synthetic_blobs(10, 2, 2, 4.0, 1.0, 1).unwrap();
        assert!(ahsc(&tiny_space(), &data, 2, 3, 1, 5, MetricKind::Accuracy).is_err());
        assert!(ahsc(&tiny_space(), &data, 2, 0, 1, 5, MetricKind::Accuracy).is_err());
    }

    #[test]
    fn ahsc_all_discarded_is_an_error() {
        // All-zero features freeze every ReLU at zero: hidden biases keep a
        // zero gradient, so penultimate activations stay exactly zero and
        // every proxy is zero.
        let features = Matrix::zeros(20, 3);
        let labels: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let data = Dataset::new(
            features,
            labels,
            2,
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        let err = ahsc(&tiny_space(), &data, 4, 2, 3, 5, MetricKind::Accuracy).unwrap_err();
        assert!(matches!(err, Error::AllDiscarded { sampled: 4 }));
    }

    #[test]
    fn random_search_trains_everything() {
        let data = synthetic_blobs(20, 3, 4, 4.0, 1.0, 29).unwrap();
        let result = random_search(&tiny_space(), &data, 3, 31, 6, MetricKind::Accuracy).unwrap();
        assert_eq!(result.outcomes.len(), 3);
        assert!(result.outcomes.iter().all(|o| o.full_score.is_some()));
        assert!(result.outcomes.iter().all(|o| o.record.is_none()));
        assert_eq!(result.probe_epochs, 0);
        assert!(result.full_epochs >= 3 && result.full_epochs <= 18);
        let best_score = result.best.score;
        for o in &result.outcomes {
            assert!(o.full_score.unwrap() <= best_score);
        }
    }

    #[test]
    fn random_search_single_config() {
        let data = synthetic_blobs(15, 2, 3, 4.0, 1.0, 37).unwrap();
        let result = random_search(&tiny_space(), &data, 1, 41, 5, MetricKind::Accuracy).unwrap();
        assert_eq!(result.best.config.config_id, 0);
    }

    #[test]
    fn budget_comparison_on_shared_run() {
        // With epochs_full > 1 and n2 < n1, probing is cheaper than
        // training everything.
        let data = synthetic_blobs(20, 3, 4, 4.0, 1.0, 43).unwrap();
        let full = random_search(&tiny_space(), &data, 5, 47, 6, MetricKind::Accuracy).unwrap();
        let guided = ahsc(&tiny_space(), &data, 5, 2, 47, 6, MetricKind::Accuracy).unwrap();
        assert!(
            guided.total_epochs() < full.total_epochs(),
            "guided {} vs full {}",
            guided.total_epochs(),
            full.total_epochs()
        );
        // Shared configs: identical sampling across both entry points.
        for (a, b) in guided.outcomes.iter().zip(&full.outcomes) {
            assert_eq!(a.config, b.config);
        }
    }

    #[test]
    fn auc_metric_path_works() {
        let data = synthetic_blobs(20, 2, 3, 4.0, 1.0, 53).unwrap();
        let result = random_search(&tiny_space(), &data, 2, 59, 5, MetricKind::MacroAuc).unwrap();
        assert!(result.best.score <= 1.0 && result.best.score >= 0.0);
    }

    #[test]
    fn rank_selection_invariant_to_monotone_transform() {
        let scores = vec![(0u64, 0.3f64), (1, 0.1), (2, 0.7), (3, 0.2)];
        let transformed: Vec<(u64, f64)> =
            scores.iter().map(|&(id, s)| (id, (s * 10.0).exp())).collect();
        assert_eq!(lowest_k(&scores, 2), lowest_k(&transformed, 2));
    }
}
