//! Proper orthogonal decomposition of the global snapshot matrix.
//!
//! [`assemble_global_matrix`] concatenates the members of a snapshot set into
//! the single `m x (N*p)` matrix the basis is extracted from. [`PodBasis`]
//! holds the truncated left singular vectors plus the full singular-value
//! spectrum and converts between full and reduced coordinates.

use ndarray::{concatenate, Array1, Array2, ArrayView2, Axis};
use ndarray_linalg::{JobSvd, Scalar, SVDDC};
use num_traits::{One, Zero};

use crate::field::real;
use thiserror::Error;

use crate::store::ParametricSnapshotSet;
use crate::{Field, C64};

#[derive(Debug, Error)]
pub enum PodError {
    #[error("rank {requested} outside 1..={max} for a {rows} x {cols} matrix")]
    RankOutOfBounds { requested: usize, max: usize, rows: usize, cols: usize },
    #[error("column height {found} does not match the basis dimension {expected}")]
    SpaceDimMismatch { expected: usize, found: usize },
    #[error("row count {found} does not match the basis rank {expected}")]
    RankDimMismatch { expected: usize, found: usize },
    #[error("linear algebra backend failed: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

/// Horizontal concatenation `[X^{mu_1} ... X^{mu_p}]` in member order.
pub fn assemble_global_matrix(set: &ParametricSnapshotSet) -> Array2<C64> {
    let views: Vec<ArrayView2<C64>> = set.members().iter().map(|m| m.values().view()).collect();
    concatenate(Axis(1), &views).expect("members share the spatial dimension")
}

/// Orthonormal spatial basis of rank `n` with the full singular spectrum.
#[derive(Debug, Clone)]
pub struct PodBasis<F: Field> {
    modes: Array2<F>,
    singular_values: Vec<F::Real>,
}

impl<F: Field> PodBasis<F> {
    /// Extracts the first `n` left singular vectors of `global`.
    ///
    /// When the matrix is tall (`m > 4 * cols`) the basis is computed from the
    /// eigendecomposition of the Gram matrix (method of snapshots); otherwise a
    /// direct divide-and-conquer SVD is used. Mode phases are fixed so that the
    /// largest-magnitude entry of each mode is real and positive.
    pub fn fit(global: ArrayView2<F>, n: usize) -> Result<Self, PodError> {
        let (m, cols) = global.dim();
        let max_rank = m.min(cols);
        if n == 0 || n > max_rank {
            return Err(PodError::RankOutOfBounds { requested: n, max: max_rank, rows: m, cols });
        }

        let (mut modes, singular_values) = if m > 4 * cols {
            Self::fit_snapshot_method(global, n)?
        } else {
            let (u, s, _) = global.svddc(JobSvd::Some)?;
            let u = u.expect("left singular vectors requested");
            (u.slice(ndarray::s![.., ..n]).to_owned(), s.to_vec())
        };
        fix_mode_phases(&mut modes);
        Ok(Self { modes, singular_values })
    }

    /// Gram-matrix path for `m >> cols`: decompose `X^H X` and lift its
    /// singular vectors through `X`. The Gram matrix is Hermitian positive
    /// semi-definite, so its left singular vectors are its eigenvectors and
    /// the singular values the squared singular values of `X`. A final thin
    /// QR guards orthonormality when the requested rank reaches numerically
    /// zero singular values.
    fn fit_snapshot_method(
        global: ArrayView2<F>,
        n: usize,
    ) -> Result<(Array2<F>, Vec<F::Real>), PodError> {
        use ndarray_linalg::QR;
        let gram = hermitian_transpose(global).dot(&global);
        let (v, gram_values, _) = gram.svddc(JobSvd::Some)?;
        let v = v.expect("singular vectors requested");
        let singular_values: Vec<F::Real> = gram_values.iter().map(|&ev| ev.sqrt()).collect();
        let mut lifted = Array2::<F>::zeros((global.nrows(), n));
        for j in 0..n {
            let sigma = singular_values[j];
            let scale = if sigma > F::Real::zero() {
                F::from_real(F::Real::one() / sigma)
            } else {
                F::one()
            };
            let col = global.dot(&v.column(j)).mapv(|x| x * scale);
            lifted.column_mut(j).assign(&col);
        }
        let (q, _r) = lifted.qr()?;
        Ok((q, singular_values))
    }

    /// Spatial dimension m.
    pub fn space_dim(&self) -> usize {
        self.modes.nrows()
    }

    /// Retained rank n.
    pub fn rank(&self) -> usize {
        self.modes.ncols()
    }

    pub fn modes(&self) -> ArrayView2<'_, F> {
        self.modes.view()
    }

    /// Full non-increasing singular spectrum of the fitted matrix.
    pub fn singular_values(&self) -> &[F::Real] {
        &self.singular_values
    }

    /// Reduced coordinates `U_n^H * columns` of full-space columns.
    pub fn project(&self, columns: ArrayView2<F>) -> Result<Array2<F>, PodError> {
        if columns.nrows() != self.space_dim() {
            return Err(PodError::SpaceDimMismatch {
                expected: self.space_dim(),
                found: columns.nrows(),
            });
        }
        Ok(hermitian_transpose(self.modes.view()).dot(&columns))
    }

    /// Full-space reconstruction `U_n * reduced` of reduced columns.
    pub fn lift(&self, reduced: ArrayView2<F>) -> Result<Array2<F>, PodError> {
        if reduced.nrows() != self.rank() {
            return Err(PodError::RankDimMismatch {
                expected: self.rank(),
                found: reduced.nrows(),
            });
        }
        Ok(self.modes.dot(&reduced))
    }

    /// Advisory helper: smallest rank whose retained energy fraction
    /// `sum_{i<=n} s_i^2 / sum s_i^2` reaches `tau`.
    pub fn rank_for_energy(&self, tau: F::Real) -> usize {
        let total: F::Real = self
            .singular_values
            .iter()
            .fold(F::Real::zero(), |acc, &s| acc + s * s);
        if total <= F::Real::zero() {
            return 1;
        }
        let mut acc = F::Real::zero();
        for (i, &s) in self.singular_values.iter().enumerate() {
            acc = acc + s * s;
            if acc / total >= tau {
                return i + 1;
            }
        }
        self.singular_values.len()
    }

    /// Rebuilds a basis from serialized parts, re-checking orthonormality.
    pub(crate) fn from_parts(
        modes: Array2<F>,
        singular_values: Vec<F::Real>,
    ) -> Result<Self, PodError> {
        let basis = Self { modes, singular_values };
        let gram = hermitian_transpose(basis.modes.view()).dot(&basis.modes);
        let n = basis.rank();
        let tol = real::<F::Real>(1e-8);
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { F::one() } else { F::zero() };
                if (gram[[i, j]] - expected).abs() > tol {
                    return Err(PodError::RankDimMismatch { expected: n, found: n });
                }
            }
        }
        Ok(basis)
    }
}

/// Conjugate transpose.
pub(crate) fn hermitian_transpose<F: Field>(a: ArrayView2<F>) -> Array2<F> {
    a.t().mapv(|v| v.conj())
}

/// Multiplies each column by a unit phase so its largest-magnitude entry
/// (first such entry on ties) becomes real and positive.
fn fix_mode_phases<F: Field>(modes: &mut Array2<F>) {
    for mut col in modes.columns_mut() {
        let mut best = 0;
        let mut best_mag = F::Real::zero();
        for (i, v) in col.iter().enumerate() {
            let mag = v.abs();
            if mag > best_mag {
                best_mag = mag;
                best = i;
            }
        }
        if best_mag > F::Real::zero() {
            let pivot = col[best];
            let phase = pivot * F::from_real(F::Real::one() / best_mag);
            let correction = phase.conj();
            col.mapv_inplace(|v| v * correction);
        }
    }
}

/// One-step helper used by tests and the training pipeline.
pub fn frobenius_norm<F: Field>(a: ArrayView2<F>) -> F::Real {
    a.iter().fold(F::Real::zero(), |acc, v| acc + v.square()).sqrt()
}

/// Euclidean norm of a vector.
pub fn vector_norm<F: Field>(v: &Array1<F>) -> F::Real {
    v.iter().fold(F::Real::zero(), |acc, x| acc + x.square()).sqrt()
}
