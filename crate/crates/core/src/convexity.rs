//! Loss-landscape analysis: the strong-convexity proxy that drives the
//! search, plus the slower instruments used to sanity-check it.
//!
//! The proxy `sc_proxy_batch` is a cheap analytic score read off the last
//! two layers after a forward pass. Everything else in this module exists
//! to interrogate it: a finite-difference Hessian oracle restricted to the
//! last-layer weight block, an epsilon-ball sharpness estimate, a covering
//! style generalization bound, and 2-D loss-surface slices for plotting.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{frobenius_norm, norm2, Matrix, SymmetricMatrix};
use crate::nn::{forward, loss_ce, Model};
use crate::seed::derive_seed;

/// Hard cap on the flattened parameter count accepted by the
/// finite-difference Hessian oracle; probes grow quadratically.
pub const ORACLE_PARAM_LIMIT: usize = 512;

/// Which norm of the last-layer weights divides the proxy.
///
/// The full-matrix Frobenius norm is the default reading; the minimum
/// per-class weight-vector norm is the stricter variant exposed behind the
/// CLI's `--col-norm` flag. Neither is asserted to be the "right" one — the
/// proxy is validated by rank correlation against the Hessian oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProxyDenominator {
    #[default]
    FullMatrix,
    ColumnMin,
}

/// Per-configuration summary of the mini-batch proxy sweep.
#[derive(Debug, Clone)]
pub struct ConvexityRecord {
    /// Assigned by the search driver; 0 until a config claims the record.
    pub config_id: u64,
    pub per_batch_proxies: Vec<f64>,
    pub mu_max: f64,
    pub discarded: bool,
}

/// Strong-convexity proxy of one batch:
/// `(1/m_b) * ||A||_F / denom(W)`, where `A` is the penultimate activation
/// matrix from a fresh forward pass and `W` the last-layer weights.
pub fn sc_proxy_batch(model: &Model, features: &Matrix) -> Result<f64> {
    sc_proxy_batch_with(model, features, ProxyDenominator::FullMatrix)
}

/// [`sc_proxy_batch`] with an explicit denominator variant.
pub fn sc_proxy_batch_with(
    model: &Model,
    features: &Matrix,
    denom: ProxyDenominator,
) -> Result<f64> {
    if model.n_layers() < 2 {
        return Err(Error::Architecture(
            "the proxy needs at least two layers (a penultimate activation)".into(),
        ));
    }
    if features.rows() == 0 {
        return Err(Error::Data("proxy of an empty batch".into()));
    }
    let cache = forward(model, features)?;
    let a_norm = frobenius_norm(cache.penultimate());
    let w_last = model.weights.last().expect("n_layers >= 2");
    let w_norm = match denom {
        ProxyDenominator::FullMatrix => frobenius_norm(w_last),
        ProxyDenominator::ColumnMin => (0..w_last.rows())
            .map(|c| norm2(w_last.row(c)))
            .fold(f64::INFINITY, f64::min),
    };
    if w_norm == 0.0 {
        return Err(Error::Degenerate(
            "last-layer weight norm is zero; proxy undefined".into(),
        ));
    }
    // Division order matters for the ulp-level homogeneity guarantee.
    Ok(a_norm / w_norm / features.rows() as f64)
}

/// Sweeps the dataset in index order with contiguous batches (last one may
/// be short) and keeps the largest per-batch proxy. A non-positive maximum
/// marks the record as discarded.
pub fn mu_max(model: &Model, data: &Dataset, batch_size: usize) -> Result<ConvexityRecord> {
    mu_max_with(model, data, batch_size, ProxyDenominator::FullMatrix)
}

/// [`mu_max`] with an explicit denominator variant.
pub fn mu_max_with(
    model: &Model,
    data: &Dataset,
    batch_size: usize,
    denom: ProxyDenominator,
) -> Result<ConvexityRecord> {
    if batch_size == 0 {
        return Err(Error::Data("batch_size must be positive".into()));
    }
    if data.is_empty() {
        return Err(Error::Data("proxy sweep over an empty dataset".into()));
    }
    let m = data.len();
    let mut per_batch_proxies = Vec::with_capacity(m.div_ceil(batch_size));
    let mut start = 0;
    while start < m {
        let end = (start + batch_size).min(m);
        let indices: Vec<usize> = (start..end).collect();
        let batch = data.subset(&indices);
        per_batch_proxies.push(sc_proxy_batch_with(model, &batch.features, denom)?);
        start = end;
    }
    let mu = per_batch_proxies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ConvexityRecord {
        config_id: 0,
        per_batch_proxies,
        mu_max: mu,
        discarded: mu <= 0.0,
    })
}

/// Supremum of the finite-difference last-layer Hessian norm over the same
/// contiguous mini-batches [`mu_max`] sweeps, for proxy-vs-oracle
/// diagnostics.
pub fn oracle_max(model: &Model, data: &Dataset, batch_size: usize, eps: f64) -> Result<f64> {
    if batch_size == 0 {
        return Err(Error::Data("batch_size must be positive".into()));
    }
    if data.is_empty() {
        return Err(Error::Data("oracle sweep over an empty dataset".into()));
    }
    let m = data.len();
    let mut best = f64::NEG_INFINITY;
    let mut start = 0;
    while start < m {
        let end = (start + batch_size).min(m);
        let indices: Vec<usize> = (start..end).collect();
        let batch = data.subset(&indices);
        let norm = last_layer_hessian_norm(model, &batch.features, &batch.labels, eps)?;
        best = best.max(norm);
        start = end;
    }
    Ok(best)
}

/// Finite-difference Hessian:
/// `H[i][j] = (f(x+he_i+he_j) - f(x+he_i) - f(x+he_j) + f(x)) / h^2`,
/// evaluated on the upper triangle and mirrored, so the result is exactly
/// symmetric. Truncation error is O(h).
pub fn hessian_fd<F>(f: F, x0: &[f64], eps: f64) -> Result<SymmetricMatrix>
where
    F: Fn(&[f64]) -> f64,
{
    if eps <= 0.0 || !eps.is_finite() {
        return Err(Error::Data(format!("eps must be positive and finite, got {eps}")));
    }
    let n = x0.len();
    if n == 0 {
        return Err(Error::Shape("hessian of a zero-dimensional function".into()));
    }

    let check = |v: f64, what: &str| -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numeric(format!("non-finite value at probe {what}")))
        }
    };

    let mut x = x0.to_vec();
    let f_base = check(f(&x), "base point")?;
    let mut f_single = Vec::with_capacity(n);
    for i in 0..n {
        x[i] = x0[i] + eps;
        f_single.push(check(f(&x), &format!("({i})"))?);
        x[i] = x0[i];
    }

    let mut h = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            x[i] = x0[i] + eps;
            x[j] += eps; // doubles coordinate i when j == i
            let f_pair = check(f(&x), &format!("({i}, {j})"))?;
            x[i] = x0[i];
            x[j] = x0[j];
            let value = (f_pair - f_single[i] - f_single[j] + f_base) / (eps * eps);
            h.set(i, j, value);
            h.set(j, i, value);
        }
    }
    SymmetricMatrix::new(h)
}

/// Frobenius norm of the loss Hessian with respect to the flattened
/// last-layer weights, all other parameters frozen — the expensive quantity
/// the proxy stands in for.
///
/// Freezing the lower layers means the penultimate activations are constants
/// of the probe, so they are computed once up front.
pub fn last_layer_hessian_norm(
    model: &Model,
    features: &Matrix,
    labels: &[usize],
    eps: f64,
) -> Result<f64> {
    let w_last = model.weights.last().ok_or_else(|| {
        Error::Architecture("model has no layers".into())
    })?;
    let (k, width) = (w_last.rows(), w_last.cols());
    let n_params = k * width;
    if n_params > ORACLE_PARAM_LIMIT {
        return Err(Error::Size {
            what: "last-layer parameter count".into(),
            got: n_params,
            limit: ORACLE_PARAM_LIMIT,
        });
    }
    if features.rows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} feature rows but {} labels",
            features.rows(),
            labels.len()
        )));
    }
    let cache = forward(model, features)?;
    let penultimate = cache.penultimate().clone();
    let bias = model.biases.last().expect("layer exists").clone();
    let m = features.rows();

    let loss_of = |w_flat: &[f64]| -> f64 {
        // Head-only forward: z = A w^T + b, then softmax + CE.
        let mut z = Matrix::zeros(m, k);
        for s in 0..m {
            let a_row = penultimate.row(s);
            let z_row = z.row_mut(s);
            for (c, zv) in z_row.iter_mut().enumerate() {
                let w_row = &w_flat[c * width..(c + 1) * width];
                *zv = crate::linalg::dot(a_row, w_row) + bias[c];
            }
        }
        let probs = crate::nn::softmax_rows(&z);
        loss_ce(&probs, labels).map_or(f64::NAN, |l| l)
    };

    let h = hessian_fd(loss_of, w_last.as_slice(), eps)?;
    Ok(frobenius_norm(h.as_matrix()))
}

/// Controls for the projected-gradient-ascent sharpness estimate.
#[derive(Debug, Clone, Copy)]
pub struct SharpnessParams {
    pub epsilon: f64,
    pub ascent_iters: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SharpnessParams {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            ascent_iters: 10,
            restarts: 5,
            seed: 0,
        }
    }
}

/// Epsilon-ball sharpness:
/// `zeta = (max_{v in B(eps, w)} loss(v) - loss(w)) / (1 + loss(w))`.
///
/// The inner maximum is estimated by projected gradient ascent with
/// finite-difference gradients and several random restarts on the sphere,
/// so the returned value is a lower bound on the true sharpness. The center
/// itself is a feasible point, which keeps the estimate nonnegative.
pub fn sharpness<F>(loss: F, w: &[f64], params: &SharpnessParams) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if params.epsilon <= 0.0 || !params.epsilon.is_finite() {
        return Err(Error::Data(format!(
            "epsilon must be positive and finite, got {}",
            params.epsilon
        )));
    }
    if params.ascent_iters == 0 || params.restarts == 0 {
        return Err(Error::Data(
            "sharpness needs at least one iteration and one restart".into(),
        ));
    }
    let n = w.len();
    if n == 0 {
        return Err(Error::Shape("sharpness of a zero-dimensional loss".into()));
    }
    let eps = params.epsilon;
    let f0 = loss(w);
    if !f0.is_finite() {
        return Err(Error::Numeric("loss at the center is not finite".into()));
    }

    let fd_step = 1e-6 * eps.max(1.0);
    let mut best = f0;
    let mut point = vec![0.0; n];
    let mut grad = vec![0.0; n];
    for restart in 0..params.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, restart as u64));
        // Start on the sphere of radius eps around w.
        let mut dir: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let dn = norm2(&dir);
        if dn == 0.0 {
            dir[0] = 1.0;
        } else {
            dir.iter_mut().for_each(|v| *v *= eps / dn);
        }
        for (p, (&wi, &di)) in point.iter_mut().zip(w.iter().zip(&dir)) {
            *p = wi + di;
        }
        best = best.max(loss(&point));

        for _ in 0..params.ascent_iters {
            for i in 0..n {
                let orig = point[i];
                point[i] = orig + fd_step;
                let up = loss(&point);
                point[i] = orig - fd_step;
                let down = loss(&point);
                point[i] = orig;
                grad[i] = (up - down) / (2.0 * fd_step);
            }
            let gn = norm2(&grad);
            if gn == 0.0 || !gn.is_finite() {
                break;
            }
            for (p, &g) in point.iter_mut().zip(&grad) {
                *p += eps * g / gn;
            }
            // Project back onto the ball around w.
            let mut offset: Vec<f64> = point.iter().zip(w).map(|(p, wi)| p - wi).collect();
            let on = norm2(&offset);
            if on > eps {
                offset.iter_mut().for_each(|v| *v *= eps / on);
                for (p, (&wi, &oi)) in point.iter_mut().zip(w.iter().zip(&offset)) {
                    *p = wi + oi;
                }
            }
            let value = loss(&point);
            if value.is_finite() {
                best = best.max(value);
            }
        }
    }
    Ok((best - f0) / (1.0 + f0))
}

/// Inputs to the covering-number generalization bound.
#[derive(Debug, Clone, Copy)]
pub struct CoveringBoundInput {
    pub m: usize,
    pub t: f64,
    pub beta: f64,
    pub log_cover: f64,
}

impl CoveringBoundInput {
    pub fn new(m: usize, t: f64, beta: f64, log_cover: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Data("sample count m must be at least 1".into()));
        }
        if t < 0.0 || !t.is_finite() {
            return Err(Error::Data(format!("threshold t must be finite and >= 0, got {t}")));
        }
        if beta <= 0.0 || !beta.is_finite() {
            return Err(Error::Data(format!("beta must be finite and > 0, got {beta}")));
        }
        if !log_cover.is_finite() {
            return Err(Error::Data(format!("log_cover must be finite, got {log_cover}")));
        }
        Ok(Self {
            m,
            t,
            beta,
            log_cover,
        })
    }
}

/// Probability bound `min(1, exp(-m t^2 / (18 beta^2) + log_cover))` on a
/// deviation of at least `t` between empirical and population loss.
pub fn covering_bound(inp: &CoveringBoundInput) -> f64 {
    let exponent = -(inp.m as f64) * inp.t * inp.t / (18.0 * inp.beta * inp.beta) + inp.log_cover;
    exponent.exp().min(1.0)
}

/// Loss values over a 2-D slice of parameter space.
///
/// `losses.get(ix, iy)` is the loss at offset
/// `(alpha(ix) * d1, alpha(iy) * d2)` where `alpha` walks `[-span, span]`
/// uniformly and the two directions are filter-normalized random draws.
#[derive(Debug, Clone)]
pub struct LandscapeGrid {
    pub grid_n: usize,
    pub span: f64,
    pub losses: Matrix,
}

/// Draws a random parameter direction and rescales each weight and bias
/// block to the model's corresponding block norm (filter normalization).
/// Blocks with zero model norm get a zero direction.
fn filter_normalized_direction(model: &Model, rng: &mut ChaCha8Rng) -> (Vec<Matrix>, Vec<Vec<f64>>) {
    let mut d_weights = Vec::with_capacity(model.weights.len());
    let mut d_biases = Vec::with_capacity(model.biases.len());
    for (w, b) in model.weights.iter().zip(&model.biases) {
        let mut dw: Vec<f64> = (0..w.rows() * w.cols())
            .map(|_| StandardNormal.sample(rng))
            .collect();
        let target_w = frobenius_norm(w);
        let dn = dw.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale_w = if target_w == 0.0 || dn == 0.0 { 0.0 } else { target_w / dn };
        dw.iter_mut().for_each(|v| *v *= scale_w);
        d_weights.push(Matrix::from_raw(w.rows(), w.cols(), dw));

        let mut db: Vec<f64> = (0..b.len()).map(|_| StandardNormal.sample(rng)).collect();
        let target_b = norm2(b);
        let bn = norm2(&db);
        let scale_b = if target_b == 0.0 || bn == 0.0 { 0.0 } else { target_b / bn };
        db.iter_mut().for_each(|v| *v *= scale_b);
        d_biases.push(db);
    }
    (d_weights, d_biases)
}

/// Evaluates the dataset loss over a `grid_n x grid_n` slice spanned by two
/// seeded random directions. `grid_n` must be odd so the center cell sits at
/// zero offset and reproduces the unperturbed loss exactly.
pub fn landscape_slice(
    model: &Model,
    data: &Dataset,
    grid_n: usize,
    span: f64,
    seed: u64,
) -> Result<LandscapeGrid> {
    if grid_n < 3 || grid_n.is_multiple_of(2) {
        return Err(Error::Data(format!(
            "grid_n must be odd and >= 3, got {grid_n}"
        )));
    }
    if span <= 0.0 || !span.is_finite() {
        return Err(Error::Data(format!("span must be positive and finite, got {span}")));
    }
    if data.is_empty() {
        return Err(Error::Data("landscape over an empty dataset".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d1 = filter_normalized_direction(model, &mut rng);
    let d2 = filter_normalized_direction(model, &mut rng);

    let alpha = |idx: usize| -> f64 {
        -span + 2.0 * span * idx as f64 / (grid_n - 1) as f64
    };

    let mut probe = model.clone();
    let mut losses = Matrix::zeros(grid_n, grid_n);
    for ix in 0..grid_n {
        for iy in 0..grid_n {
            let (ax, ay) = (alpha(ix), alpha(iy));
            for l in 0..model.weights.len() {
                let base_w = model.weights[l].as_slice();
                let w1 = d1.0[l].as_slice();
                let w2 = d2.0[l].as_slice();
                let out = probe.weights[l].as_mut_slice();
                for i in 0..out.len() {
                    out[i] = base_w[i] + ax * w1[i] + ay * w2[i];
                }
                let base_b = &model.biases[l];
                let b1 = &d1.1[l];
                let b2 = &d2.1[l];
                let out_b = &mut probe.biases[l];
                for i in 0..out_b.len() {
                    out_b[i] = base_b[i] + ax * b1[i] + ay * b2[i];
                }
            }
            let cache = forward(&probe, &data.features)?;
            losses.set(ix, iy, loss_ce(cache.probs(), &data.labels)?);
        }
    }
    Ok(LandscapeGrid {
        grid_n,
        span,
        losses,
    })
}
