//! Dense real matrices and the norm facts the search relies on.
//!
//! The proxy machinery needs three things from linear algebra: Frobenius
//! norms (the default matrix norm throughout), spectral norms via power
//! iteration, and extreme eigenvalues of small symmetric matrices so oracle
//! Hessian blocks can be checked against the norm sandwich
//! `spectral <= frobenius <= sqrt(rank) * spectral`.
//!
//! Everything here is plain `f64`, row-major, and allocation-honest; there is
//! no attempt at BLAS-level performance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Jacobi sweeps are only meant for oracle-scale blocks.
pub const JACOBI_DIM_LIMIT: usize = 512;

/// Dense row-major matrix of finite `f64` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, validating shape and finiteness.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "matrix entry ({}, {}) is not finite",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    /// Builds from a slice of equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Shape("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("rows have unequal lengths".into()));
        }
        let entries: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(rows.len(), cols, entries)
    }

    // Internal constructor for values produced by arithmetic we already
    // control; skips the finiteness scan on hot paths.
    pub(crate) fn from_raw(rows: usize, cols: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), rows * cols);
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.cols + j] = v;
    }

    /// Row `i` as a contiguous slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[j * self.rows + i] = self.entries[i * self.cols + j];
            }
        }
        out
    }

    /// `self * v` for a vector of length `cols`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| dot(self.row(i), v))
            .collect()
    }

    /// `self^T * u` for a vector of length `rows`.
    pub fn tr_matvec(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.rows, "tr_matvec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &ui) in u.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += ui * a;
            }
        }
        out
    }

    /// Entrywise scaling by `c`.
    pub fn scaled(&self, c: f64) -> Matrix {
        Matrix::from_raw(
            self.rows,
            self.cols,
            self.entries.iter().map(|v| c * v).collect(),
        )
    }
}

/// Symmetric matrix; symmetry is enforced exactly at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    inner: Matrix,
}

impl SymmetricMatrix {
    /// Wraps a square matrix whose entries satisfy `a[i][j] == a[j][i]` exactly.
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::Shape(format!(
                "symmetric matrix must be square, got {}x{}",
                m.rows, m.cols
            )));
        }
        for i in 0..m.rows {
            for j in (i + 1)..m.cols {
                if m.get(i, j) != m.get(j, i) {
                    return Err(Error::Shape(format!(
                        "entries ({i}, {j}) and ({j}, {i}) differ"
                    )));
                }
            }
        }
        Ok(Self { inner: m })
    }

    /// Diagonal matrix from the given entries.
    pub fn diag(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut m = Matrix::zeros(n, n);
        for (i, &v) in d.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Numeric(format!("diagonal entry {i} is not finite")));
            }
            m.set(i, i, v);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.inner.rows
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner.get(i, j)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.inner
    }

    /// `self * v`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        self.inner.matvec(v)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    sum_of_squares_norm(v)
}

/// Square root of the sum of squared entries.
pub fn frobenius_norm(m: &Matrix) -> f64 {
    sum_of_squares_norm(&m.entries)
}

/// Plain sqrt-of-sum-of-squares, with a rescaled second pass only when the
/// squares underflow to zero or overflow to infinity. The fast path stays
/// bit-identical for normal-range inputs.
fn sum_of_squares_norm(values: &[f64]) -> f64 {
    let naive = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if naive != 0.0 && naive.is_finite() {
        return naive;
    }
    let amax = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if amax == 0.0 || !amax.is_finite() {
        return amax;
    }
    amax * values
        .iter()
        .map(|v| {
            let r = v / amax;
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Result of a power-iteration spectral norm estimate.
///
/// `value` is a Rayleigh-quotient estimate and therefore never exceeds the
/// true largest singular value; `converged` is false when `max_iter` ran out
/// before the relative change dropped below tolerance, in which case `value`
/// is the best estimate seen.
#[derive(Debug, Clone, Copy)]
pub struct SpectralNorm {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

const SPECTRAL_DEFAULT_SEED: u64 = 0x5EED_0001;

/// Largest singular value via power iteration on `M^T M` with a fixed
/// internal seed. See [`spectral_norm_seeded`] for the seeded variant.
pub fn spectral_norm(m: &Matrix, tol: f64, max_iter: usize) -> SpectralNorm {
    spectral_norm_seeded(m, tol, max_iter, SPECTRAL_DEFAULT_SEED)
}

/// Largest singular value via power iteration on `M^T M`, its start vector
/// drawn from `seed` so runs are reproducible.
pub fn spectral_norm_seeded(m: &Matrix, tol: f64, max_iter: usize, seed: u64) -> SpectralNorm {
    assert!(tol > 0.0, "tolerance must be positive");
    assert!(max_iter >= 1, "max_iter must be at least 1");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..m.cols)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let n = norm2(&v);
    if n == 0.0 {
        // Measure-zero under the Gaussian draw; still handle it.
        v[0] = 1.0;
    } else {
        v.iter_mut().for_each(|x| *x /= n);
    }

    let mut sigma = 0.0;
    for it in 1..=max_iter {
        let u = m.matvec(&v); // v is unit, so ||u|| estimates sigma
        let new_sigma = norm2(&u);
        if new_sigma == 0.0 {
            return SpectralNorm {
                value: 0.0,
                converged: true,
                iterations: it,
            };
        }
        let w = m.tr_matvec(&u);
        let wn = norm2(&w);
        if wn == 0.0 {
            return SpectralNorm {
                value: new_sigma,
                converged: true,
                iterations: it,
            };
        }
        v = w;
        v.iter_mut().for_each(|x| *x /= wn);

        let rel_change = (new_sigma - sigma).abs() / new_sigma.max(f64::MIN_POSITIVE);
        sigma = new_sigma;
        if rel_change <= tol {
            return SpectralNorm {
                value: sigma,
                converged: true,
                iterations: it,
            };
        }
    }
    SpectralNorm {
        value: sigma,
        converged: false,
        iterations: max_iter,
    }
}

/// Extreme eigenvalues of a symmetric matrix via cyclic Jacobi sweeps.
///
/// Sweeps run until the off-diagonal Frobenius mass drops below
/// `tol * ||S||_F`. Dimensions above [`JACOBI_DIM_LIMIT`] are rejected;
/// oracle Hessian blocks stay small by construction.
pub fn sym_eig_extremes(s: &SymmetricMatrix, tol: f64) -> Result<(f64, f64)> {
    let n = s.dim();
    if n > JACOBI_DIM_LIMIT {
        return Err(Error::Size {
            what: "symmetric eigensolver dimension".into(),
            got: n,
            limit: JACOBI_DIM_LIMIT,
        });
    }
    let mut a = s.as_matrix().as_slice().to_vec();
    let total = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if total == 0.0 {
        return Ok((0.0, 0.0));
    }

    const MAX_SWEEPS: usize = 64;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = {
            let mut s2 = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    let v = a[p * n + q];
                    s2 += 2.0 * v * v;
                }
            }
            s2.sqrt()
        };
        if off <= tol * total {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - sn * aiq;
                    a[p * n + i] = a[i * n + p];
                    a[i * n + q] = sn * aip + c * aiq;
                    a[q * n + i] = a[i * n + q];
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let d = a[i * n + i];
        lo = lo.min(d);
        hi = hi.max(d);
    }
    Ok((lo, hi))
}
