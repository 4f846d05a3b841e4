//! Zero-mean Gaussian-process regression with a squared-exponential kernel,
//! solved by Cholesky factorization, componentwise on real and imaginary
//! target parts.
//!
//! Deterministic defaults: lengthscale = median pairwise training distance,
//! signal deviation = per-component standard deviation of the targets, noise
//! deviation = 1e-8 times the signal deviation. No hyperparameter
//! optimization is performed.

use ndarray::{Array1, Array2, ArrayView2};
use ndarray_linalg::{Cholesky, Lapack, UPLO};
use num_traits::{Float, One, Zero};

use super::RegressionError;
use crate::field::real;
use crate::Field;

#[derive(Debug, Clone)]
pub(crate) struct GprState<F: Field> {
    pub lengthscale: F::Real,
    /// One entry per real target column (2n of them: re parts, then im parts).
    columns: Vec<GprColumn<F::Real>>,
    target_columns: usize,
}

#[derive(Debug, Clone)]
struct GprColumn<R> {
    sigma_f: R,
    noise_ratio_sq: R,
    /// `(E + ratio^2 I + jitter I)^{-1} y` via the stored factor.
    alpha: Array1<R>,
    chol_lower: Array2<R>,
}

pub(crate) fn fit<F: Field>(
    points: ArrayView2<F::Real>,
    values: ArrayView2<F>,
    lengthscale: Option<f64>,
    noise: Option<f64>,
) -> Result<GprState<F>, RegressionError>
where
    F::Real: Lapack,
{
    let (p, _q) = points.dim();
    let n = values.ncols();
    let lengthscale = match lengthscale {
        Some(l) if l > 0.0 => real::<F::Real>(l),
        Some(l) => {
            return Err(RegressionError::BadHyperparameter(format!(
                "gpr lengthscale must be positive, got {l}"
            )))
        }
        None => median_pairwise_distance(points),
    };

    let correlation = correlation_matrix(points, lengthscale);
    let mut columns = Vec::with_capacity(2 * n);
    for part in 0..2 {
        for j in 0..n {
            let y: Array1<F::Real> = values
                .column(j)
                .iter()
                .map(|v| if part == 0 { v.re() } else { v.im() })
                .collect();
            let sigma_f = signal_deviation(&y);
            let sigma_n = match noise {
                Some(s) if s >= 0.0 => real::<F::Real>(s),
                Some(s) => {
                    return Err(RegressionError::BadHyperparameter(format!(
                        "gpr noise must be non-negative, got {s}"
                    )))
                }
                None => real::<F::Real>(1e-8) * sigma_f,
            };
            let noise_ratio_sq = (sigma_n / sigma_f) * (sigma_n / sigma_f);
            let (chol_lower, jitter) = factor_with_jitter(&correlation, noise_ratio_sq)?;
            let scaled_y = y.mapv(|v| v / (sigma_f * sigma_f));
            let alpha = cholesky_solve(&chol_lower, &scaled_y);
            let _ = jitter;
            columns.push(GprColumn {
                sigma_f,
                noise_ratio_sq,
                alpha,
                chol_lower,
            });
        }
    }
    let _ = p;
    Ok(GprState { lengthscale, columns, target_columns: n })
}

impl<F: Field> GprState<F> {
    /// Posterior mean at `x`.
    pub(crate) fn evaluate(&self, points: ArrayView2<F::Real>, x: &[F::Real]) -> Array1<F> {
        let kstar = self.cross_correlation(points, x);
        let n = self.target_columns;
        let mut out = Array1::<F>::zeros(n);
        for j in 0..n {
            let re = self.posterior_mean(j, &kstar);
            let im = self.posterior_mean(n + j, &kstar);
            out[j] = F::complex(re, im);
        }
        out
    }

    /// Posterior variance at `x` for each complex component: the sum of the
    /// real-part and imaginary-part process variances. Reported only, never
    /// used by the forecasting pipeline.
    pub(crate) fn variance(&self, points: ArrayView2<F::Real>, x: &[F::Real]) -> Array1<F::Real> {
        let kstar = self.cross_correlation(points, x);
        let n = self.target_columns;
        Array1::from_shape_fn(n, |j| {
            self.posterior_variance(j, &kstar) + self.posterior_variance(n + j, &kstar)
        })
    }

    fn cross_correlation(&self, points: ArrayView2<F::Real>, x: &[F::Real]) -> Array1<F::Real> {
        let inv = F::Real::one() / (real::<F::Real>(2.0) * self.lengthscale * self.lengthscale);
        Array1::from_shape_fn(points.nrows(), |i| {
            let d2 = points
                .row(i)
                .iter()
                .zip(x)
                .fold(F::Real::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
            Float::exp(-d2 * inv)
        })
    }

    fn posterior_mean(&self, column: usize, kstar: &Array1<F::Real>) -> F::Real {
        let col = &self.columns[column];
        // sigma_f^2 in k* cancels against the 1/sigma_f^2 folded into alpha
        let sf2 = col.sigma_f * col.sigma_f;
        kstar.iter().zip(&col.alpha).fold(F::Real::zero(), |acc, (&k, &a)| acc + k * a) * sf2
    }

    fn posterior_variance(&self, column: usize, kstar: &Array1<F::Real>) -> F::Real {
        let col = &self.columns[column];
        let v = cholesky_solve(&col.chol_lower, kstar);
        let reduction =
            kstar.iter().zip(&v).fold(F::Real::zero(), |acc, (&k, &w)| acc + k * w);
        let sf2 = col.sigma_f * col.sigma_f;
        let prior = sf2 * (F::Real::one() + col.noise_ratio_sq);
        Float::max(prior - sf2 * reduction, F::Real::zero())
    }
}

fn correlation_matrix<R: Lapack + Float>(points: ArrayView2<R>, lengthscale: R) -> Array2<R> {
    let p = points.nrows();
    let inv = R::one() / (real::<R>(2.0) * lengthscale * lengthscale);
    Array2::from_shape_fn((p, p), |(i, j)| {
        let d2 = points
            .row(i)
            .iter()
            .zip(points.row(j))
            .fold(R::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
        Float::exp(-d2 * inv)
    })
}

/// Cholesky of `E + (ratio^2 + jitter) I`, escalating the jitter until the
/// factorization succeeds.
fn factor_with_jitter<R: Lapack + Float>(
    correlation: &Array2<R>,
    noise_ratio_sq: R,
) -> Result<(Array2<R>, R), RegressionError> {
    let p = correlation.nrows();
    let mut jitter = R::zero();
    for attempt in 0..16 {
        let mut k = correlation.clone();
        for i in 0..p {
            k[[i, i]] = k[[i, i]] + noise_ratio_sq + jitter;
        }
        if let Ok(lower) = k.cholesky(UPLO::Lower) {
            return Ok((lower, jitter));
        }
        jitter = if attempt == 0 { real::<R>(1e-12) } else { jitter * real::<R>(10.0) };
        if jitter > real::<R>(1e-1) {
            break;
        }
    }
    Err(RegressionError::Factorization(
        "gpr kernel matrix is not positive definite even with jitter".into(),
    ))
}

/// Solves `L L^T x = b` by forward and backward substitution.
fn cholesky_solve<R: Float>(lower: &Array2<R>, b: &Array1<R>) -> Array1<R> {
    let p = lower.nrows();
    let mut y = Array1::<R>::zeros(p);
    for i in 0..p {
        let mut acc = b[i];
        for j in 0..i {
            acc = acc - lower[[i, j]] * y[j];
        }
        y[i] = acc / lower[[i, i]];
    }
    let mut x = Array1::<R>::zeros(p);
    for i in (0..p).rev() {
        let mut acc = y[i];
        for j in i + 1..p {
            acc = acc - lower[[j, i]] * x[j];
        }
        x[i] = acc / lower[[i, i]];
    }
    x
}

fn median_pairwise_distance<R: Float>(points: ArrayView2<R>) -> R {
    let p = points.nrows();
    let mut distances = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            let d2 = points
                .row(i)
                .iter()
                .zip(points.row(j))
                .fold(R::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
            distances.push(d2.sqrt());
        }
    }
    if distances.is_empty() {
        return R::one();
    }
    distances.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = distances.len() / 2;
    let median = if distances.len() % 2 == 1 {
        distances[mid]
    } else {
        (distances[mid - 1] + distances[mid]) / real::<R>(2.0)
    };
    if median > R::zero() {
        median
    } else {
        R::one()
    }
}

/// Population standard deviation with a positive fallback for constant
/// targets, so the kernel never collapses to zero.
fn signal_deviation<R: Float>(y: &Array1<R>) -> R {
    let p = real::<R>(y.len() as f64);
    let mean = y.iter().fold(R::zero(), |a, &v| a + v) / p;
    let var = y.iter().fold(R::zero(), |a, &v| a + (v - mean) * (v - mean)) / p;
    let std = var.sqrt();
    if std > R::zero() {
        return std;
    }
    let rms = (y.iter().fold(R::zero(), |a, &v| a + v * v) / p).sqrt();
    if rms > R::zero() {
        rms
    } else {
        R::one()
    }
}
