//! Thin-plate spline interpolation `phi(r) = r^2 ln r` with an appended
//! affine polynomial term, for scattered points in any parameter dimension.

use ndarray::{s, Array1, Array2, ArrayView2};
use ndarray_linalg::{Lapack, LeastSquaresSvd};
use num_traits::{Float, One};

use super::RegressionError;
use crate::Field;

#[derive(Debug, Clone)]
pub(crate) struct ThinPlate<F: Field> {
    /// p x n radial weights.
    pub weights: Array2<F>,
    /// (q + 1) x n affine coefficients (constant first).
    pub poly: Array2<F>,
}

fn kernel<R: Float>(r: R) -> R {
    if r > R::zero() {
        r * r * r.ln()
    } else {
        R::zero()
    }
}

fn distance<R: Float>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).fold(R::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y)).sqrt()
}

/// Solves the saddle system `[K P; P^T 0] [w; c] = [y; 0]` by minimum-norm
/// least squares. Real and imaginary target parts share one factorization,
/// so complex fitting is componentwise by construction.
pub(crate) fn fit<F: Field>(
    points: ArrayView2<F::Real>,
    values: ArrayView2<F>,
) -> Result<ThinPlate<F>, RegressionError>
where
    F::Real: Lapack,
{
    let (p, q) = points.dim();
    let n = values.ncols();
    let size = p + q + 1;
    let mut system = Array2::<F::Real>::zeros((size, size));
    for i in 0..p {
        for j in 0..p {
            let r = distance(points.row(i).as_slice().unwrap(), points.row(j).as_slice().unwrap());
            system[[i, j]] = kernel(r);
        }
        system[[i, p]] = F::Real::one();
        system[[p, i]] = F::Real::one();
        for k in 0..q {
            system[[i, p + 1 + k]] = points[[i, k]];
            system[[p + 1 + k, i]] = points[[i, k]];
        }
    }

    // real and imaginary parts as separate right-hand-side columns
    let mut rhs = Array2::<F::Real>::zeros((size, 2 * n));
    for i in 0..p {
        for j in 0..n {
            rhs[[i, j]] = values[[i, j]].re();
            rhs[[i, n + j]] = values[[i, j]].im();
        }
    }
    let solution = system.least_squares(&rhs)?.solution;

    let combine = |rows: std::ops::Range<usize>| {
        let mut out = Array2::<F>::zeros((rows.len(), n));
        for (local, row) in rows.enumerate() {
            for j in 0..n {
                out[[local, j]] = F::complex(solution[[row, j]], solution[[row, n + j]]);
            }
        }
        out
    };
    Ok(ThinPlate { weights: combine(0..p), poly: combine(p..size) })
}

impl<F: Field> ThinPlate<F> {
    pub(crate) fn evaluate(&self, points: ArrayView2<F::Real>, x: &[F::Real]) -> Array1<F> {
        let (p, q) = points.dim();
        let n = self.weights.ncols();
        let mut out = self.poly.row(0).to_owned();
        for k in 0..q {
            let coord = F::from_real(x[k]);
            out = out + self.poly.slice(s![k + 1, ..]).mapv(|c| c * coord);
        }
        for i in 0..p {
            let r = distance(points.row(i).as_slice().unwrap(), x);
            let phi = F::from_real(kernel(r));
            for j in 0..n {
                out[j] += self.weights[[i, j]] * phi;
            }
        }
        out
    }
}
