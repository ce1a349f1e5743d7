//! Scaled unscented transform.
//!
//! Sigma points are placed at `mean ± sqrt(N + λ)·S_i` where `S` is the lower
//! Cholesky factor of the covariance and `λ = 3α² − N`, so the spread factor is
//! always `√3·α` regardless of the state dimension. Statistics are rebuilt with
//! a mean-weight vector `w` and a dense covariance-weight matrix
//!
//! ```text
//! W = (I − [w … w]) · diag(Wc) · (I − [w … w])ᵀ
//! ```
//!
//! which folds the mean subtraction into the weights: `cov = X·W·Xᵀ`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_ALPHA: f64 = 1e-4;
pub const MAX_ALPHA: f64 = 1.0;

const JITTER_START: f64 = 1e-12;
const JITTER_RETRIES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UtConfig {
    pub alpha: f64,
}

impl Default for UtConfig {
    fn default() -> Self {
        Self { alpha: 1.0 }
    }
}

impl UtConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        let cfg = Self { alpha };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_ALPHA..=MAX_ALPHA).contains(&self.alpha) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        Ok(())
    }
}

/// Weights of the scaled unscented transform for one state dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct UtWeights {
    n: usize,
    alpha: f64,
    lambda: f64,
    mean_weights: DVector<f64>,
    cov_weights: DVector<f64>,
    cov_weight_matrix: DMatrix<f64>,
}

impl UtWeights {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Number of sigma points, `2N + 1`.
    pub fn len(&self) -> usize {
        2 * self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mean_weights(&self) -> &DVector<f64> {
        &self.mean_weights
    }

    /// Diagonal covariance weights `Wc_0 … Wc_2N`.
    pub fn cov_weights(&self) -> &DVector<f64> {
        &self.cov_weights
    }

    pub fn cov_weight_matrix(&self) -> &DMatrix<f64> {
        &self.cov_weight_matrix
    }

    /// Spread factor `sqrt(N + λ)`, equal to `√3·α`.
    pub fn spread(&self) -> f64 {
        (self.n as f64 + self.lambda).sqrt()
    }
}

pub fn compute_weights(n: usize, cfg: &UtConfig) -> Result<UtWeights> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    cfg.validate()?;
    let alpha = cfg.alpha;
    let nf = n as f64;
    let lambda = 3.0 * alpha * alpha - nf;
    let scale = nf + lambda;
    if scale == 0.0 {
        return Err(Error::InvalidAlpha(alpha));
    }
    let count = 2 * n + 1;

    let side = 1.0 / (2.0 * scale);
    let mut mean_weights = DVector::from_element(count, side);
    mean_weights[0] = lambda / scale;
    let mut cov_weights = DVector::from_element(count, side);
    // (1 − α² + β) with β = 2
    cov_weights[0] = lambda / scale + (3.0 - alpha * alpha);

    let centering =
        DMatrix::identity(count, count) - DMatrix::from_fn(count, count, |i, _| mean_weights[i]);
    let w = &centering * DMatrix::from_diagonal(&cov_weights) * centering.transpose();

    Ok(UtWeights {
        n,
        alpha,
        lambda,
        mean_weights,
        cov_weights,
        cov_weight_matrix: symmetrize(w),
    })
}

/// Sigma points stored column-wise: column 0 is the generating mean, columns
/// `1..=N` the positive and `N+1..=2N` the negative excursions.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSet {
    pub points: DMatrix<f64>,
}

impl SigmaSet {
    pub fn dim(&self) -> usize {
        self.points.nrows()
    }

    pub fn len(&self) -> usize {
        self.points.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.points.ncols() == 0
    }

    /// Apply `f` to every sigma point, producing a new set whose row count is
    /// the output dimension of `f`.
    pub fn map<F>(&self, f: F) -> SigmaSet
    where
        F: Fn(&DVector<f64>) -> DVector<f64>,
    {
        let columns: Vec<DVector<f64>> = self
            .points
            .column_iter()
            .map(|c| f(&c.into_owned()))
            .collect();
        SigmaSet {
            points: DMatrix::from_columns(&columns),
        }
    }
}

/// Lower-triangular `S` with `S·Sᵀ = p`.
///
/// Zero pivots of a semi-definite input produce zero columns instead of a
/// failure. If the factor does not reproduce `p` to `1e-9·(1 + max|p|)`, the
/// factorization is retried on `p + ε·I` with `ε` doubling from `1e-12`.
pub fn matrix_sqrt_psd(p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !p.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "covariance is {}x{}, expected square",
            p.nrows(),
            p.ncols()
        )));
    }
    if let Some(l) = semidefinite_cholesky(p) {
        return Ok(l);
    }
    let n = p.nrows();
    let mut eps = JITTER_START;
    for _ in 0..JITTER_RETRIES {
        let jittered = p + DMatrix::identity(n, n) * eps;
        if let Some(l) = semidefinite_cholesky(&jittered) {
            return Ok(l);
        }
        eps *= 2.0;
    }
    Err(Error::NotPsd {
        retries: JITTER_RETRIES,
    })
}

fn semidefinite_cholesky(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let scale = 1.0 + a.amax();
    if !scale.is_finite() {
        return None;
    }
    let pivot_tol = 1e-14 * scale;
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d > pivot_tol {
            let root = d.sqrt();
            l[(j, j)] = root;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / root;
            }
        } else if d < -pivot_tol {
            return None;
        }
        // near-zero pivot: leave the column at zero
    }
    let residual = (&l * l.transpose() - a).amax();
    (residual <= 1e-9 * scale).then_some(l)
}

pub fn compute_sigma_points(
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    w: &UtWeights,
) -> Result<SigmaSet> {
    let n = w.n();
    if mean.len() != n || cov.nrows() != n || cov.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "weights are for N={n}, mean has {} entries, cov is {}x{}",
            mean.len(),
            cov.nrows(),
            cov.ncols()
        )));
    }
    let root = matrix_sqrt_psd(cov)? * w.spread();
    let mut points = DMatrix::zeros(n, 2 * n + 1);
    points.set_column(0, mean);
    for i in 0..n {
        let offset = root.column(i);
        points.set_column(1 + i, &(mean + offset));
        points.set_column(1 + n + i, &(mean - offset));
    }
    Ok(SigmaSet { points })
}

/// Weighted mean `X·w` and covariance `X·W·Xᵀ` of a sigma set.
pub fn reconstruct_statistics(
    sigma: &SigmaSet,
    w: &UtWeights,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if sigma.len() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "sigma set has {} points, weights expect {}",
            sigma.len(),
            w.len()
        )));
    }
    let mean = &sigma.points * w.mean_weights();
    let dev = centered(&sigma.points, &mean);
    let cov = weighted_outer(&dev, &dev, w.cov_weights());
    Ok((mean, symmetrize(cov)))
}

/// Cross moment `X·W·Yᵀ` between two sigma sets drawn from the same weights.
pub fn cross_moment(x: &SigmaSet, y: &SigmaSet, w: &UtWeights) -> Result<DMatrix<f64>> {
    if x.len() != w.len() || y.len() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "sigma sets have {} and {} points, weights expect {}",
            x.len(),
            y.len(),
            w.len()
        )));
    }
    let dx = centered(&x.points, &(&x.points * w.mean_weights()));
    let dy = centered(&y.points, &(&y.points * w.mean_weights()));
    Ok(weighted_outer(&dx, &dy, w.cov_weights()))
}

// X·W·Yᵀ evaluated as Σ Wc_i (X_i − x̄)(Y_i − ȳ)ᵀ. The dense W has entries of
// order (N + λ)⁻³, so forming the product directly cancels catastrophically
// for small α.
fn centered(points: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let mut dev = points.clone();
    for mut col in dev.column_iter_mut() {
        col -= mean;
    }
    dev
}

fn weighted_outer(dx: &DMatrix<f64>, dy: &DMatrix<f64>, weights: &DVector<f64>) -> DMatrix<f64> {
    let mut scaled = dx.clone();
    for (mut col, w) in scaled.column_iter_mut().zip(weights.iter()) {
        col *= *w;
    }
    scaled * dy.transpose()
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}
