//! Natural cubic spline through 1-D knots, componentwise on the targets.

use ndarray::{Array1, Array2, ArrayView2};
use num_traits::One;

use crate::field::real;
use crate::Field;

/// Second derivatives at the knots, one column per target component.
/// Natural boundary conditions pin the first and last rows to zero.
pub(crate) fn second_derivatives<F: Field>(
    knots: &[F::Real],
    values: ArrayView2<F>,
) -> Array2<F> {
    let p = knots.len();
    let n = values.ncols();
    let mut m = Array2::<F>::zeros((p, n));
    if p < 3 {
        return m;
    }
    let h: Vec<F::Real> = knots.windows(2).map(|w| w[1] - w[0]).collect();

    // tridiagonal system for the interior second derivatives, solved with the
    // Thomas algorithm; real coefficients act componentwise on complex targets
    let interior = p - 2;
    let sixth = real::<F::Real>(1.0 / 6.0);
    let third = real::<F::Real>(1.0 / 3.0);
    let mut diag: Vec<F::Real> = (0..interior).map(|i| (h[i] + h[i + 1]) * third).collect();
    let lower: Vec<F::Real> = (1..interior).map(|i| h[i] * sixth).collect();
    let upper: Vec<F::Real> = (0..interior - 1).map(|i| h[i + 1] * sixth).collect();
    let mut rhs = Array2::<F>::zeros((interior, n));
    for i in 0..interior {
        let d1 = values.row(i + 1).to_owned() - values.row(i).to_owned();
        let d2 = values.row(i + 2).to_owned() - values.row(i + 1).to_owned();
        let row = d2.mapv(|v| v * F::from_real(F::Real::one() / h[i + 1]))
            - d1.mapv(|v| v * F::from_real(F::Real::one() / h[i]));
        rhs.row_mut(i).assign(&row);
    }
    for i in 1..interior {
        let w = lower[i - 1] / diag[i - 1];
        diag[i] = diag[i] - w * upper[i - 1];
        let prev = rhs.row(i - 1).to_owned();
        let updated = rhs.row(i).to_owned() - prev.mapv(|v| v * F::from_real(w));
        rhs.row_mut(i).assign(&updated);
    }
    let mut solution = Array2::<F>::zeros((interior, n));
    let last = rhs.row(interior - 1).mapv(|v| v * F::from_real(F::Real::one() / diag[interior - 1]));
    solution.row_mut(interior - 1).assign(&last);
    for i in (0..interior - 1).rev() {
        let next = solution.row(i + 1).to_owned();
        let row = (rhs.row(i).to_owned() - next.mapv(|v| v * F::from_real(upper[i])))
            .mapv(|v| v * F::from_real(F::Real::one() / diag[i]));
        solution.row_mut(i).assign(&row);
    }
    for i in 0..interior {
        m.row_mut(i + 1).assign(&solution.row(i));
    }
    m
}

/// Evaluates the spline at `x`, which must lie within the knot range.
pub(crate) fn evaluate<F: Field>(
    knots: &[F::Real],
    values: ArrayView2<F>,
    second: &Array2<F>,
    x: F::Real,
) -> Array1<F> {
    let p = knots.len();
    // segment index such that knots[i] <= x <= knots[i + 1]
    let i = match knots.iter().position(|&k| x < k) {
        Some(0) | None => {
            if x <= knots[0] {
                0
            } else {
                p - 2
            }
        }
        Some(j) => j - 1,
    };
    let h = knots[i + 1] - knots[i];
    let a = (knots[i + 1] - x) / h;
    let b = (x - knots[i]) / h;
    let sixth = real::<F::Real>(1.0 / 6.0);
    let ca = (a * a * a - a) * h * h * sixth;
    let cb = (b * b * b - b) * h * h * sixth;
    let term = |row: ndarray::ArrayView1<F>, w: F::Real| row.mapv(|v| v * F::from_real(w));
    term(values.row(i), a)
        + term(values.row(i + 1), b)
        + term(second.row(i), ca)
        + term(second.row(i + 1), cb)
}
