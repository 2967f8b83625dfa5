//! Executable checks of the strong-convexity lemmas the search logic leans
//! on, run on quadratics where every quantity is analytically known.
//!
//! Neural losses are not globally strongly convex, so these inequalities are
//! verified where they are exact: `f(x) = (1/2) x^T H x` with PSD `H`, where
//! `mu = lambda_min(H)`, `beta = lambda_max(H)`, and the minimizer is the
//! origin. Each check reports its worst relative violation over the sampled
//! points and a witness when it fails.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, sym_eig_extremes, Matrix, SymmetricMatrix};
use crate::seed::derive_seed;

/// Relative slack for the algebraic inequalities.
pub const RELATIVE_SLACK: f64 = 1e-12;
/// Looser slack for the decay-chain checks, which compound exponentials.
pub const DECAY_SLACK: f64 = 1e-9;

/// Negative eigenvalues above this magnitude (relative to beta) disqualify a
/// matrix from being treated as PSD; smaller ones are rounding and clamp to 0.
const PSD_TOLERANCE: f64 = 1e-9;

/// `f(x) = (1/2) x^T H x` with PSD `H`; minimizer 0, `mu`/`beta` the extreme
/// eigenvalues computed at construction.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    h: SymmetricMatrix,
    mu: f64,
    beta: f64,
    label: String,
}

impl QuadraticProblem {
    /// Wraps a symmetric PSD matrix; rejects indefinite input.
    pub fn from_matrix(h: SymmetricMatrix, label: impl Into<String>) -> Result<Self> {
        let (lo, hi) = sym_eig_extremes(&h, 1e-14)?;
        if lo < -PSD_TOLERANCE * hi.abs().max(1.0) {
            return Err(Error::Data(format!(
                "matrix is not positive semidefinite (lambda_min = {lo})"
            )));
        }
        Ok(Self {
            h,
            mu: lo.max(0.0),
            beta: hi,
            label: label.into(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            h: SymmetricMatrix::new(Matrix::identity(n)).expect("identity is symmetric"),
            mu: 1.0,
            beta: 1.0,
            label: format!("identity{n}"),
        }
    }

    /// Diagonal PSD problem; entries must be nonnegative.
    pub fn diag(entries: &[f64]) -> Result<Self> {
        if entries.iter().any(|&v| v < 0.0) {
            return Err(Error::Data("diagonal entries must be nonnegative".into()));
        }
        let h = SymmetricMatrix::diag(entries)?;
        let mu = entries.iter().copied().fold(f64::INFINITY, f64::min);
        let beta = entries.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let label = format!(
            "diag_{}",
            entries
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join("_")
        );
        Ok(Self {
            h,
            mu,
            beta,
            label,
        })
    }

    /// `G^T G + I/2` for Gaussian `G`: random, strictly positive definite.
    pub fn random_psd(n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<f64> = (0..n * n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut h = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = 0.0;
                for k in 0..n {
                    s += g[k * n + i] * g[k * n + j];
                }
                if i == j {
                    s += 0.5;
                }
                h.set(i, j, s);
                h.set(j, i, s);
            }
        }
        Self::from_matrix(SymmetricMatrix::new(h)?, format!("random_psd{n}"))
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.h
    }

    /// `(1/2) x^T H x`.
    pub fn f(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.h.matvec(x))
    }

    /// `H x`.
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        self.h.matvec(x)
    }

    fn require_strongly_convex(&self) -> Result<()> {
        if self.mu > 0.0 {
            Ok(())
        } else {
            Err(Error::NotStronglyConvex)
        }
    }
}

/// Outcome of one inequality check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    /// Which inequality was tested.
    pub check: String,
    /// Label of the problem it ran on.
    pub problem: String,
    pub points_tested: usize,
    /// Worst relative violation seen; nonpositive values mean the
    /// inequality held with margin.
    pub max_violation: f64,
    /// Slack the violation was compared against.
    pub slack: f64,
    pub pass: bool,
    /// Point (or concatenated pair) achieving the worst violation, present
    /// only on failure.
    pub witness: Option<Vec<f64>>,
}

/// Relative violation of `lhs >= rhs`: positive when the inequality breaks.
fn violation_geq(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs) / lhs.abs().max(rhs.abs()).max(1.0)
}

fn build_report(
    check: &str,
    problem: &str,
    slack: f64,
    evals: impl IntoIterator<Item = (f64, Vec<f64>)>,
) -> CheckReport {
    let mut max_violation = f64::NEG_INFINITY;
    let mut witness = None;
    let mut count = 0;
    for (violation, point) in evals {
        count += 1;
        if violation > max_violation {
            max_violation = violation;
            witness = Some(point);
        }
    }
    if count == 0 {
        // No points: nothing violated, nothing to witness.
        max_violation = 0.0;
        witness = None;
    }
    let pass = max_violation <= slack;
    CheckReport {
        check: check.to_string(),
        problem: problem.to_string(),
        points_tested: count,
        max_violation,
        slack,
        pass,
        witness: if pass { None } else { witness },
    }
}

/// Polyak-Lojasiewicz inequality: `(1/2)||grad f(x)||^2 >= mu (f(x) - f*)`.
pub fn check_pl(p: &QuadraticProblem, points: &[Vec<f64>]) -> Result<CheckReport> {
    p.require_strongly_convex()?;
    Ok(build_report(
        "pl_inequality",
        p.label(),
        RELATIVE_SLACK,
        points.iter().map(|x| {
            let lhs = 0.5 * p.grad(x).iter().map(|g| g * g).sum::<f64>();
            let rhs = p.mu() * p.f(x);
            (violation_geq(lhs, rhs), x.clone())
        }),
    ))
}

/// Gradient gap: `||grad f(x) - grad f(y)|| >= mu ||x - y||`.
pub fn check_grad_gap(p: &QuadraticProblem, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<CheckReport> {
    p.require_strongly_convex()?;
    Ok(build_report(
        "gradient_gap",
        p.label(),
        RELATIVE_SLACK,
        pairs.iter().map(|(x, y)| {
            let gx = p.grad(x);
            let gy = p.grad(y);
            let dg: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a - b).collect();
            let dx: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
            let lhs = norm2(&dg);
            let rhs = p.mu() * norm2(&dx);
            let mut witness = x.clone();
            witness.extend_from_slice(y);
            (violation_geq(lhs, rhs), witness)
        }),
    ))
}

/// Co-coercivity-style bound:
/// `(grad f(x) - grad f(y))^T (x - y) <= (1/mu) ||grad f(x) - grad f(y)||^2`.
pub fn check_cocoercivity(
    p: &QuadraticProblem,
    pairs: &[(Vec<f64>, Vec<f64>)],
) -> Result<CheckReport> {
    p.require_strongly_convex()?;
    Ok(build_report(
        "cocoercivity",
        p.label(),
        RELATIVE_SLACK,
        pairs.iter().map(|(x, y)| {
            let gx = p.grad(x);
            let gy = p.grad(y);
            let dg: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a - b).collect();
            let dx: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
            let lhs = dot(&dg, &dx);
            let rhs = dot(&dg, &dg) / p.mu();
            let mut witness = x.clone();
            witness.extend_from_slice(y);
            // Want lhs <= rhs.
            (violation_geq(rhs, lhs), witness)
        }),
    ))
}

/// Two-sided sandwich:
/// `(1/(2 mu))||grad f(x)||^2 >= f(x) - f* >= (mu/2)||x - x*||^2`.
pub fn check_sandwich(p: &QuadraticProblem, points: &[Vec<f64>]) -> Result<CheckReport> {
    p.require_strongly_convex()?;
    Ok(build_report(
        "gap_sandwich",
        p.label(),
        RELATIVE_SLACK,
        points.iter().map(|x| {
            let gap = p.f(x);
            let upper = p.grad(x).iter().map(|g| g * g).sum::<f64>() / (2.0 * p.mu());
            let lower = 0.5 * p.mu() * dot(x, x);
            let v = violation_geq(upper, gap).max(violation_geq(gap, lower));
            (v, x.clone())
        }),
    ))
}

/// Losses `f(x_0), ..., f(x_steps)` along gradient descent with the fixed
/// step `1/beta`.
pub fn gd_trace(p: &QuadraticProblem, x0: &[f64], steps: usize) -> Result<Vec<f64>> {
    if x0.len() != p.dim() {
        return Err(Error::Shape(format!(
            "x0 has dimension {}, problem has {}",
            x0.len(),
            p.dim()
        )));
    }
    if p.beta() <= 0.0 {
        return Err(Error::Degenerate("zero matrix has no descent dynamics".into()));
    }
    let alpha = 1.0 / p.beta();
    let mut x = x0.to_vec();
    let mut losses = Vec::with_capacity(steps + 1);
    losses.push(p.f(&x));
    for _ in 0..steps {
        let g = p.grad(&x);
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= alpha * gi;
        }
        losses.push(p.f(&x));
    }
    Ok(losses)
}

/// Linear convergence of gradient descent with step `1/beta`:
/// `f(x_k) - f* <= (1 - mu/beta)^k (f(x_0) - f*)` for every `k <= steps`.
pub fn gd_convergence(p: &QuadraticProblem, x0: &[f64], steps: usize) -> Result<CheckReport> {
    let losses = gd_trace(p, x0, steps)?;
    let rate = 1.0 - p.mu() / p.beta();
    let f0 = losses[0];
    Ok(build_report(
        "gd_linear_convergence",
        p.label(),
        DECAY_SLACK,
        losses.iter().enumerate().map(|(k, &fk)| {
            let bound = rate.powi(k as i32) * f0;
            // Witness is the step index as a 1-vector; iterates are implied.
            (violation_geq(bound, fk), vec![k as f64])
        }),
    ))
}

/// Decaying per-step improvement along a descent trace:
/// `f(x_t) - f(x_{t+1}) <= exp(-alpha mu t) * (f(x_0) - f*)`.
///
/// The per-step improvement can never exceed the remaining gap, and the gap
/// itself decays geometrically; the exponential form is the continuous
/// envelope of that chain. The first step of an isotropic problem saturates
/// the bound exactly.
pub fn epoch_benefit(
    history: &[f64],
    mu: f64,
    alpha: f64,
    f0_minus_fstar: f64,
) -> Result<CheckReport> {
    if history.len() < 2 {
        return Err(Error::Data(
            "improvement check needs at least two recorded losses".into(),
        ));
    }
    if mu.is_nan() || mu <= 0.0 {
        return Err(Error::NotStronglyConvex);
    }
    if alpha.is_nan() || alpha <= 0.0 || f0_minus_fstar.is_nan() || f0_minus_fstar < 0.0 {
        return Err(Error::Data(format!(
            "need alpha > 0 and a nonnegative initial gap, got {alpha} and {f0_minus_fstar}"
        )));
    }
    let decay = alpha * mu;
    Ok(build_report(
        "epoch_benefit_decay",
        "descent_trace",
        DECAY_SLACK,
        history.windows(2).enumerate().map(|(t, w)| {
            let improvement = (w[0] - w[1]).abs();
            let bound = (-decay * t as f64).exp() * f0_minus_fstar;
            (violation_geq(bound, improvement), vec![t as f64])
        }),
    ))
}

/// Deterministic sample points for a problem: Gaussian directions at several
/// magnitudes.
pub fn sample_points(p: &QuadraticProblem, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scales = [0.1, 1.0, 10.0];
    (0..count)
        .map(|i| {
            let scale = scales[i % scales.len()];
            (0..p.dim())
                .map(|_| {
                    let v: f64 = StandardNormal.sample(&mut rng);
                    scale * v
                })
                .collect()
        })
        .collect()
}

fn sample_pairs(p: &QuadraticProblem, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let xs = sample_points(p, count, derive_seed(seed, 1));
    let ys = sample_points(p, count, derive_seed(seed, 2));
    xs.into_iter().zip(ys).collect()
}

/// The three standard problems the suite runs on.
pub fn default_problems() -> Result<Vec<QuadraticProblem>> {
    Ok(vec![
        QuadraticProblem::identity(4),
        QuadraticProblem::diag(&[1.0, 4.0])?,
        QuadraticProblem::random_psd(8, 2024)?,
    ])
}

/// All six checks on one problem, with deterministic sample points.
pub fn run_problem_checks(p: &QuadraticProblem, seed: u64) -> Result<Vec<CheckReport>> {
    let points = sample_points(p, 32, derive_seed(seed, 10));
    let pairs = sample_pairs(p, 16, derive_seed(seed, 20));
    let x0 = sample_points(p, 1, derive_seed(seed, 30)).remove(0);
    let steps = 100;

    let losses = gd_trace(p, &x0, steps)?;
    let mut reports = vec![
        check_pl(p, &points)?,
        check_grad_gap(p, &pairs)?,
        check_cocoercivity(p, &pairs)?,
        check_sandwich(p, &points)?,
        gd_convergence(p, &x0, steps)?,
        epoch_benefit(&losses, p.mu(), 1.0 / p.beta(), losses[0])?,
    ];
    // Tag the trace-based report with the problem it came from.
    if let Some(last) = reports.last_mut() {
        last.problem = p.label().to_string();
    }
    Ok(reports)
}

/// Runs every check on the standard problems. One report per
/// (problem, inequality) pair, 18 in total.
pub fn run_default_suite() -> Result<Vec<CheckReport>> {
    let mut reports = Vec::new();
    for (i, p) in default_problems()?.iter().enumerate() {
        reports.extend(run_problem_checks(p, derive_seed(0x7E09, i as u64))?);
    }
    Ok(reports)
}
