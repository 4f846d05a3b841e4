//! Best-fit linear time advance from snapshot sequences.
//!
//! [`DmdModel::fit`] computes the truncated-SVD projection of the one-step
//! operator, its eigendecomposition and the full-order modes, optionally
//! after time-delay stacking of `d` consecutive snapshots (higher-order
//! variant, `DmdConfig::hodmd_depth > 1`). Spectra can be cleaned with
//! [`DmdModel::stabilize`], which removes eigenvalues away from the unit
//! circle and normalizes the survivors. [`DmdModel::forecast`] evaluates the
//! fitted expansion at arbitrary integer time labels, inside or outside the
//! training window.

use ndarray::{s, Array1, Array2, ArrayView2};
use ndarray_linalg::{Eig, JobSvd, LeastSquaresSvd, Scalar, SVDDC};
use num_traits::{Float, One, Zero};

use crate::field::real;
use thiserror::Error;

use crate::pod::{frobenius_norm, vector_norm};
use crate::Field;

#[derive(Debug, Error)]
pub enum DmdError {
    #[error("hodmd depth must be at least 1, got {0}")]
    InvalidDepth(usize),
    #[error("need at least {needed} snapshots for depth {depth}, got {got}")]
    TooFewSnapshots { needed: usize, got: usize, depth: usize },
    #[error("svd rank {requested} exceeds the bound {max} = min(state dim * depth, N - depth)")]
    RankOutOfBounds { requested: usize, max: usize },
    #[error("snapshot matrix is numerically zero, no operator can be fitted")]
    ZeroData,
    #[error("stabilization tolerance must be non-negative, got {0}")]
    NegativeTolerance(f64),
    #[error("stabilization discarded every mode: empty spectrum")]
    EmptySpectrum,
    #[error("stabilization needs the training data, which this model does not carry")]
    TrainingDataUnavailable,
    #[error("time label {0} too far from the training origin")]
    LabelRange(i64),
    #[error("linear algebra backend failed: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

/// How mode amplitudes are fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeStrategy {
    /// Least-squares fit of the first training snapshot (`b = pinv(Phi) x_1`).
    #[default]
    FirstSnapshot,
    /// Least-squares fit over every training snapshot.
    LeastSquaresAll,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DmdConfig {
    /// SVD truncation rank; 0 retains every singular value above
    /// `max(rows, cols) * sigma_1 * machine epsilon`.
    pub svd_rank: usize,
    /// Number of time-lagged snapshots stacked before the fit; 1 is plain DMD.
    pub hodmd_depth: usize,
    /// Distance-from-unit-circle tolerance; `Some` stabilizes right after the fit.
    pub stabilization: Option<f64>,
    pub amplitude_strategy: AmplitudeStrategy,
}

impl Default for DmdConfig {
    fn default() -> Self {
        Self {
            svd_rank: 0,
            hodmd_depth: 1,
            stabilization: None,
            amplitude_strategy: AmplitudeStrategy::FirstSnapshot,
        }
    }
}

/// Fate of one eigenvalue of the original fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Disposition {
    /// Never passed through stabilization.
    Untouched,
    /// Survived stabilization and was projected onto the unit circle.
    KeptNormalized,
    /// Removed because its modulus exceeded `1 + epsilon`.
    DiscardedDivergent,
    /// Removed because its modulus was below `1 - epsilon`.
    DiscardedConvergent,
}

/// Per-eigenvalue stabilization audit record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizationEntry<F> {
    /// Eigenvalue as produced by the fit, before any normalization.
    pub original: F,
    pub disposition: Disposition,
}

/// Fitted DMD expansion `x_k = Phi diag(lambda^(k - label_origin)) b`.
#[derive(Debug, Clone)]
pub struct DmdModel<F: Field> {
    modes: Array2<F>,
    eigenvalues: Array1<F>,
    amplitudes: Array1<F>,
    depth: usize,
    label_origin: i64,
    amplitude_strategy: AmplitudeStrategy,
    stabilization: Vec<StabilizationEntry<F>>,
    one_step_residual: F::Real,
    one_step_residual_rel: F::Real,
    rank_truncation: Option<RankTruncation>,
    // retained for amplitude refits; dropped by serialization
    training: Option<Array2<F>>,
    stacked_modes: Option<Array2<F>>,
}

/// Recorded when the requested rank ran into numerically zero singular values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankTruncation {
    pub requested: usize,
    pub effective: usize,
}

impl<F: Field> DmdModel<F> {
    /// Fits the operator to an `s x N` snapshot sequence whose first column
    /// carries the time label `label_origin`.
    ///
    /// With `hodmd_depth = d > 1` the fit runs on stacked vectors
    /// `[x_k; ...; x_{k+d-1}]` and the returned modes are the first `s` rows
    /// of the stacked modes, renormalized, with amplitudes refitted against
    /// the unstacked first snapshot. When `config.stabilization` is set the
    /// returned model is already stabilized.
    pub fn fit(
        sequence: ArrayView2<F>,
        config: &DmdConfig,
        label_origin: i64,
    ) -> Result<Self, DmdError> {
        let model = Self::fit_raw(sequence, config, label_origin)?;
        match config.stabilization {
            Some(eps) => model.stabilize(eps),
            None => Ok(model),
        }
    }

    fn fit_raw(
        sequence: ArrayView2<F>,
        config: &DmdConfig,
        label_origin: i64,
    ) -> Result<Self, DmdError> {
        let d = config.hodmd_depth;
        if d < 1 {
            return Err(DmdError::InvalidDepth(d));
        }
        let (s_dim, n_time) = sequence.dim();
        if n_time < d + 1 || s_dim == 0 {
            return Err(DmdError::TooFewSnapshots { needed: d + 1, got: n_time, depth: d });
        }

        let stacked = stack_delays(sequence, d);
        let cols = stacked.ncols();
        // materialized: sliced length-1 axes carry zero strides, which the
        // LAPACK layer rejects
        let x = owned_standard(stacked.slice(s![.., ..cols - 1]));
        let y = stacked.slice(s![.., 1..]);

        let (u, sigma, vt) = x.svddc(JobSvd::Some)?;
        let u = u.expect("left singular vectors requested");
        let vt = vt.expect("right singular vectors requested");
        if sigma[0] <= F::Real::zero() {
            return Err(DmdError::ZeroData);
        }

        // numerically nonzero singular values
        let dims = (s_dim * d).max(cols - 1);
        let tol = real::<F::Real>(dims as f64) * sigma[0] * Float::epsilon();
        let available = sigma.iter().take_while(|&&sv| sv > tol).count().max(1);

        let max_rank = (s_dim * d).min(cols - 1);
        let (rank, rank_truncation) = if config.svd_rank == 0 {
            (available, None)
        } else if config.svd_rank > max_rank {
            return Err(DmdError::RankOutOfBounds { requested: config.svd_rank, max: max_rank });
        } else if config.svd_rank > available {
            (
                available,
                Some(RankTruncation { requested: config.svd_rank, effective: available }),
            )
        } else {
            (config.svd_rank, None)
        };

        let u_r = u.slice(s![.., ..rank]);
        // Y V_r Sigma_r^-1
        let mut yv = y.dot(&crate::pod::hermitian_transpose(vt.slice(s![..rank, ..])));
        for (j, mut col) in yv.columns_mut().into_iter().enumerate() {
            let inv = F::from_real(F::Real::one() / sigma[j]);
            col.mapv_inplace(|v| v * inv);
        }
        // low-rank operator and its spectrum
        let atilde = crate::pod::hermitian_transpose(u_r).dot(&yv);
        let (eigenvalues, w) = atilde.eig()?;
        // exact DMD modes, still stacked
        let stacked_modes = yv.dot(&w);

        // one-step residual of the fitted operator in the stacked space
        let coords = stacked_modes.least_squares(&x)?.solution;
        let mut advanced = coords;
        for (i, mut row) in advanced.rows_mut().into_iter().enumerate() {
            let lambda = eigenvalues[i];
            row.mapv_inplace(|v| v * lambda);
        }
        let y_hat = stacked_modes.dot(&advanced);
        let one_step_residual = frobenius_norm((&y.to_owned() - &y_hat).view());
        let y_norm = frobenius_norm(y);
        let one_step_residual_rel = if y_norm > F::Real::zero() {
            one_step_residual / y_norm
        } else {
            F::Real::zero()
        };

        let modes = unstack_and_normalize(&stacked_modes, s_dim);
        let training = owned_standard(sequence);
        let amplitudes = fit_amplitudes(
            modes.view(),
            stacked_modes.view(),
            &eigenvalues,
            training.view(),
            d,
            config.amplitude_strategy,
        )?;

        let stabilization = eigenvalues
            .iter()
            .map(|&original| StabilizationEntry { original, disposition: Disposition::Untouched })
            .collect();

        Ok(Self {
            modes,
            eigenvalues,
            amplitudes,
            depth: d,
            label_origin,
            amplitude_strategy: config.amplitude_strategy,
            stabilization,
            one_step_residual,
            one_step_residual_rel,
            rank_truncation,
            training: Some(training),
            stacked_modes: Some(stacked_modes),
        })
    }

    /// Removes eigenvalues whose modulus is farther than `epsilon` from the
    /// unit circle, projects the survivors onto the circle and refits their
    /// amplitudes against the training data.
    ///
    /// The audit record keeps one entry per eigenvalue of the original fit, so
    /// repeated stabilization is idempotent.
    pub fn stabilize(&self, epsilon: f64) -> Result<Self, DmdError> {
        if !(epsilon >= 0.0) {
            return Err(DmdError::NegativeTolerance(epsilon));
        }
        let training = self.training.as_ref().ok_or(DmdError::TrainingDataUnavailable)?;
        let stacked_modes =
            self.stacked_modes.as_ref().ok_or(DmdError::TrainingDataUnavailable)?;
        let eps = real::<F::Real>(epsilon);

        // entries still active, in eigenvalue order
        let active: Vec<usize> = self
            .stabilization
            .iter()
            .enumerate()
            .filter(|(_, e)| {
                matches!(e.disposition, Disposition::Untouched | Disposition::KeptNormalized)
            })
            .map(|(i, _)| i)
            .collect();
        debug_assert_eq!(active.len(), self.eigenvalues.len());

        let mut stabilization = self.stabilization.clone();
        let mut kept_cols = Vec::new();
        let mut kept_values = Vec::new();
        for (pos, &entry_idx) in active.iter().enumerate() {
            let lambda = self.eigenvalues[pos];
            let modulus = lambda.abs();
            let distance = Float::abs(modulus - F::Real::one());
            if distance > eps {
                stabilization[entry_idx].disposition = if modulus > F::Real::one() {
                    Disposition::DiscardedDivergent
                } else {
                    Disposition::DiscardedConvergent
                };
            } else {
                stabilization[entry_idx].disposition = Disposition::KeptNormalized;
                kept_cols.push(pos);
                kept_values.push(project_onto_unit_circle(lambda));
            }
        }
        if kept_cols.is_empty() {
            return Err(DmdError::EmptySpectrum);
        }

        let mut modes = Array2::<F>::zeros((self.modes.nrows(), kept_cols.len()));
        let mut kept_stacked = Array2::<F>::zeros((stacked_modes.nrows(), kept_cols.len()));
        for (j, &src) in kept_cols.iter().enumerate() {
            modes.column_mut(j).assign(&self.modes.column(src));
            kept_stacked.column_mut(j).assign(&stacked_modes.column(src));
        }
        let eigenvalues = Array1::from_vec(kept_values);
        let amplitudes = fit_amplitudes(
            modes.view(),
            kept_stacked.view(),
            &eigenvalues,
            training.view(),
            self.depth,
            self.amplitude_strategy,
        )?;

        Ok(Self {
            modes,
            eigenvalues,
            amplitudes,
            depth: self.depth,
            label_origin: self.label_origin,
            amplitude_strategy: self.amplitude_strategy,
            stabilization,
            one_step_residual: self.one_step_residual,
            one_step_residual_rel: self.one_step_residual_rel,
            rank_truncation: self.rank_truncation,
            training: self.training.clone(),
            stacked_modes: Some(kept_stacked),
        })
    }

    /// Evaluates `Phi diag(lambda^(label - label_origin)) b`.
    pub fn forecast(&self, label: i64) -> Result<Array1<F>, DmdError> {
        if self.eigenvalues.is_empty() {
            return Err(DmdError::EmptySpectrum);
        }
        let exponent: i32 = (label - self.label_origin)
            .try_into()
            .map_err(|_| DmdError::LabelRange(label))?;
        let weights: Array1<F> = self
            .eigenvalues
            .iter()
            .zip(self.amplitudes.iter())
            .map(|(&l, &b)| l.powi(exponent) * b)
            .collect();
        Ok(self.modes.dot(&weights))
    }

    /// State dimension of the unstacked sequence.
    pub fn state_dim(&self) -> usize {
        self.modes.nrows()
    }

    /// Current modes, one unit-norm column per retained eigenvalue.
    pub fn modes(&self) -> ArrayView2<'_, F> {
        self.modes.view()
    }

    pub fn eigenvalues(&self) -> &Array1<F> {
        &self.eigenvalues
    }

    pub fn amplitudes(&self) -> &Array1<F> {
        &self.amplitudes
    }

    /// HODMD depth used for the fit (1 = plain DMD).
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn label_origin(&self) -> i64 {
        self.label_origin
    }

    pub fn amplitude_strategy(&self) -> AmplitudeStrategy {
        self.amplitude_strategy
    }

    /// Audit record with one entry per eigenvalue of the original fit.
    pub fn stabilization_record(&self) -> &[StabilizationEntry<F>] {
        &self.stabilization
    }

    /// `||Y - A X||_F` of the (possibly stacked) fit, before stabilization.
    pub fn one_step_residual(&self) -> F::Real {
        self.one_step_residual
    }

    /// One-step residual divided by `||Y||_F`.
    pub fn one_step_residual_rel(&self) -> F::Real {
        self.one_step_residual_rel
    }

    pub fn rank_truncation(&self) -> Option<RankTruncation> {
        self.rank_truncation
    }

    /// Whether the model still carries its training sequence (lost on
    /// deserialization), required by [`Self::stabilize`].
    pub fn has_training_data(&self) -> bool {
        self.training.is_some()
    }

    /// Rebuilds a model from serialized parts. The training sequence is not
    /// part of the serialized form, so the result cannot be re-stabilized.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        modes: Array2<F>,
        eigenvalues: Array1<F>,
        amplitudes: Array1<F>,
        depth: usize,
        label_origin: i64,
        amplitude_strategy: AmplitudeStrategy,
        stabilization: Vec<StabilizationEntry<F>>,
        one_step_residual: F::Real,
        one_step_residual_rel: F::Real,
    ) -> Self {
        Self {
            modes,
            eigenvalues,
            amplitudes,
            depth,
            label_origin,
            amplitude_strategy,
            stabilization,
            one_step_residual,
            one_step_residual_rel,
            rank_truncation: None,
            training: None,
            stacked_modes: None,
        }
    }
}

/// Copies any view into a freshly allocated row-major array. Slicing can
/// leave zero strides on length-1 axes, which the LAPACK layer rejects.
fn owned_standard<F: Field>(a: ArrayView2<F>) -> Array2<F> {
    let mut out = Array2::zeros(a.raw_dim());
    out.assign(&a);
    out
}

/// Builds the `(s*d) x (N-d+1)` delay-stacked sequence.
fn stack_delays<F: Field>(sequence: ArrayView2<F>, d: usize) -> Array2<F> {
    if d == 1 {
        return owned_standard(sequence);
    }
    let (s_dim, n_time) = sequence.dim();
    let cols = n_time - d + 1;
    let mut stacked = Array2::zeros((s_dim * d, cols));
    for k in 0..cols {
        for block in 0..d {
            stacked
                .slice_mut(s![block * s_dim..(block + 1) * s_dim, k])
                .assign(&sequence.column(k + block));
        }
    }
    stacked
}

/// First `s` rows of each stacked mode, scaled to unit norm.
fn unstack_and_normalize<F: Field>(stacked_modes: &Array2<F>, s_dim: usize) -> Array2<F> {
    let mut modes = owned_standard(stacked_modes.slice(s![..s_dim, ..]));
    for mut col in modes.columns_mut() {
        let norm = vector_norm(&col.to_owned());
        if norm > F::Real::zero() {
            let inv = F::from_real(F::Real::one() / norm);
            col.mapv_inplace(|v| v * inv);
        }
    }
    modes
}

/// Fits the amplitudes paired with the unit-norm unstacked modes.
///
/// The first-snapshot fit runs in the stacked space, where the modes stay
/// linearly independent; projecting onto the unstacked first snapshot alone
/// is underdetermined whenever the rank exceeds the state dimension. The
/// unstacking norms then rescale the coefficients so that
/// `modes * diag(lambda^k) * b` reproduces the first block of the stacked
/// expansion.
fn fit_amplitudes<F: Field>(
    modes: ArrayView2<F>,
    stacked_modes: ArrayView2<F>,
    eigenvalues: &Array1<F>,
    training: ArrayView2<F>,
    depth: usize,
    strategy: AmplitudeStrategy,
) -> Result<Array1<F>, DmdError> {
    match strategy {
        AmplitudeStrategy::FirstSnapshot => {
            let s_dim = training.nrows();
            let mut first = Array1::<F>::zeros(stacked_modes.nrows());
            for block in 0..depth {
                first
                    .slice_mut(s![block * s_dim..(block + 1) * s_dim])
                    .assign(&training.column(block));
            }
            let beta = owned_standard(stacked_modes).least_squares(&first)?.solution;
            let amplitudes = beta
                .iter()
                .enumerate()
                .map(|(j, &b)| {
                    let norm = vector_norm(&stacked_modes.slice(s![..s_dim, j]).to_owned());
                    b * F::from_real(norm)
                })
                .collect();
            Ok(amplitudes)
        }
        AmplitudeStrategy::LeastSquaresAll => {
            let (s_dim, n_time) = training.dim();
            let r = modes.ncols();
            let mut system = Array2::<F>::zeros((s_dim * n_time, r));
            let mut rhs = Array1::<F>::zeros(s_dim * n_time);
            let mut powers: Vec<F> = vec![F::one(); r];
            for k in 0..n_time {
                for j in 0..r {
                    let scaled = modes.column(j).mapv(|v| v * powers[j]);
                    system.slice_mut(s![k * s_dim..(k + 1) * s_dim, j]).assign(&scaled);
                }
                rhs.slice_mut(s![k * s_dim..(k + 1) * s_dim]).assign(&training.column(k));
                for (j, p) in powers.iter_mut().enumerate() {
                    *p = *p * eigenvalues[j];
                }
            }
            Ok(system.least_squares(&rhs)?.solution)
        }
    }
}

/// Scales a nonzero eigenvalue so its computed modulus equals 1.0 exactly.
///
/// `z / |z|` leaves the modulus within an ulp of one; iterating converges in
/// practice, and a one-ulp neighborhood search covers the remaining cases.
fn project_onto_unit_circle<F: Field>(lambda: F) -> F {
    let mut z = lambda;
    for _ in 0..16 {
        let n = z.abs();
        if n == F::Real::one() {
            return z;
        }
        z = z * F::from_real(F::Real::one() / n);
    }
    for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)] {
        let candidate = F::complex(nudge(z.re(), di), nudge(z.im(), dj));
        if candidate.abs() == F::Real::one() {
            return candidate;
        }
    }
    z
}

/// Moves a float `n` representable double-precision steps. Exact for `f64`;
/// for `f32` this may round back to the same value, which only means the
/// neighborhood search degenerates to the iterate already at hand.
fn nudge<R: Scalar + num_traits::Float>(x: R, n: i64) -> R {
    let wide: f64 = num_traits::NumCast::from(x).unwrap();
    let stepped = f64::from_bits((wide.to_bits() as i64 + n * wide.signum() as i64) as u64);
    num_traits::NumCast::from(stepped).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn real_seq(rows: &[Vec<f64>]) -> Array2<C64> {
        Array2::from_shape_fn((rows.len(), rows[0].len()), |(i, j)| c(rows[i][j], 0.0))
    }

    /// Trajectory x_{k+1} = A x_k from x1, as columns.
    fn linear_trajectory(a: &Array2<C64>, x1: &Array1<C64>, n: usize) -> Array2<C64> {
        let mut seq = Array2::zeros((x1.len(), n));
        let mut x = x1.clone();
        for k in 0..n {
            seq.column_mut(k).assign(&x);
            x = a.dot(&x);
        }
        seq
    }

    #[test]
    fn constant_sequence_has_unit_eigenvalue() {
        let seq = real_seq(&[vec![2.0; 9], vec![-1.0; 9]]);
        let config = DmdConfig { svd_rank: 1, ..Default::default() };
        let model = DmdModel::fit(seq.view(), &config, 1).unwrap();
        assert_eq!(model.eigenvalues().len(), 1);
        assert!((model.eigenvalues()[0] - c(1.0, 0.0)).norm() < 1e-12);
        for label in [1, 5, 42, -3] {
            let forecast = model.forecast(label).unwrap();
            assert!((forecast[0] - c(2.0, 0.0)).norm() < 1e-10 * 2.0);
            assert!((forecast[1] - c(-1.0, 0.0)).norm() < 1e-10 * 2.0);
        }
    }

    #[test]
    fn diagonal_system_eigenvalues_recovered() {
        // oracle: the constructed operator has spectrum {0.9, 0.5}
        let a = array![[c(0.9, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.5, 0.0)]];
        let x1 = array![c(1.0, 0.0), c(1.0, 0.0)];
        let seq = linear_trajectory(&a, &x1, 8);
        let config = DmdConfig { svd_rank: 2, ..Default::default() };
        let model = DmdModel::fit(seq.view(), &config, 1).unwrap();
        let mut eigs: Vec<f64> = model.eigenvalues().iter().map(|l| l.re).collect();
        eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((eigs[0] - 0.9).abs() < 1e-10);
        assert!((eigs[1] - 0.5).abs() < 1e-10);
        assert!(model.eigenvalues().iter().all(|l| l.im.abs() < 1e-10));
    }

    #[test]
    fn forecast_matches_matrix_power() {
        // oracle: direct matrix power A^10 x1
        let a = array![[c(0.9, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.5, 0.0)]];
        let x1 = array![c(1.0, 0.0), c(1.0, 0.0)];
        let seq = linear_trajectory(&a, &x1, 8);
        let config = DmdConfig { svd_rank: 2, ..Default::default() };
        let model = DmdModel::fit(seq.view(), &config, 1).unwrap();
        let mut expected = x1.clone();
        for _ in 0..10 {
            expected = a.dot(&expected);
        }
        let forecast = model.forecast(11).unwrap();
        for i in 0..2 {
            assert!((forecast[i] - expected[i]).norm() < 1e-8 * expected[i].norm().max(1e-12));
        }
        // zero-power case returns the first snapshot
        let at_origin = model.forecast(1).unwrap();
        for i in 0..2 {
            assert!((at_origin[i] - x1[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn hodmd_depth_one_equals_plain_dmd() {
        let a = array![[c(0.8, 0.1), c(0.05, 0.0)], [c(0.0, 0.0), c(0.9, -0.2)]];
        let x1 = array![c(1.0, 0.5), c(-0.3, 0.2)];
        let seq = linear_trajectory(&a, &x1, 10);
        let plain = DmdModel::fit(seq.view(), &DmdConfig { svd_rank: 2, ..Default::default() }, 1)
            .unwrap();
        let depth_one = DmdModel::fit(
            seq.view(),
            &DmdConfig { svd_rank: 2, hodmd_depth: 1, ..Default::default() },
            1,
        )
        .unwrap();
        // bitwise-equal eigenvalue list
        assert_eq!(plain.eigenvalues(), depth_one.eigenvalues());
        assert_eq!(plain.modes().to_owned(), depth_one.modes().to_owned());
    }

    #[test]
    fn hodmd_recovers_scalar_cosine_where_plain_dmd_fails() {
        // oracle: the recurrence x_{k+2} = 2cos(w) x_{k+1} - x_k has companion
        // matrix [[0, 1], [-1, 2cos(w)]] with eigenvalues e^{+-iw}
        let omega = 0.7_f64;
        let n = 40;
        let companion = array![
            [c(0.0, 0.0), c(1.0, 0.0)],
            [c(-1.0, 0.0), c(2.0 * omega.cos(), 0.0)]
        ];
        let (comp_eigs, _) = companion.eig().unwrap();
        let expected = [c(omega.cos(), omega.sin()), c(omega.cos(), -omega.sin())];
        for e in expected {
            assert!(
                comp_eigs.iter().any(|l| (l - e).norm() < 1e-12),
                "companion oracle disagrees with the closed form"
            );
        }

        let signal: Vec<f64> = (0..n).map(|k| (omega * k as f64).cos()).collect();
        let seq = real_seq(&[signal]);
        let y_norm = frobenius_norm(seq.slice(s![.., 1..]));

        let plain = DmdModel::fit(seq.view(), &DmdConfig { svd_rank: 1, ..Default::default() }, 0)
            .unwrap();
        assert!(plain.one_step_residual() > 0.1 * y_norm);

        let config = DmdConfig { svd_rank: 2, hodmd_depth: 2, ..Default::default() };
        let hodmd = DmdModel::fit(seq.view(), &config, 0).unwrap();
        assert!(hodmd.one_step_residual_rel() < 1e-10);
        for e in expected {
            assert!(
                hodmd.eigenvalues().iter().any(|l| (l - e).norm() < 1e-8),
                "missing eigenvalue {e}"
            );
        }
        // forecasts follow the cosine well past the training window
        for label in [n as i64, n as i64 + 25] {
            let truth = (omega * label as f64).cos();
            let forecast = hodmd.forecast(label).unwrap();
            assert!((forecast[0].re - truth).abs() < 1e-7);
            assert!(forecast[0].im.abs() < 1e-7);
        }
    }

    #[test]
    fn exact_linear_recurrence_forecasts_next_label() {
        // any sequence generated by an (s*d)-dimensional linear recurrence:
        // oracle = direct recurrence iteration
        let (a1, a2) = (0.4_f64, 0.55_f64);
        let n = 30;
        let mut vals = vec![1.0, 0.3];
        for k in 2..=n {
            vals.push(a2 * vals[k - 1] + a1 * vals[k - 2]);
        }
        let seq = real_seq(&[vals[..n].to_vec()]);
        let config = DmdConfig { svd_rank: 2, hodmd_depth: 2, ..Default::default() };
        let model = DmdModel::fit(seq.view(), &config, 0).unwrap();
        let forecast = model.forecast(n as i64).unwrap();
        assert!((forecast[0].re - vals[n]).abs() < 1e-8 * vals[n].abs());
    }

    #[test]
    fn stabilize_applies_the_distance_from_circle_rule() {
        // synthetic three-mode system with eigenvalues {1.0005, 0.5, 1.2i}
        let lambdas = [c(1.0005, 0.0), c(0.5, 0.0), c(0.0, 1.2)];
        let phi = array![
            [c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
            [c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)],
            [c(1.0, 0.0), c(0.0, 0.0), c(-2.0, 0.0)]
        ];
        let n = 12;
        let mut seq = Array2::<C64>::zeros((3, n));
        for k in 0..n {
            let mut col = Array1::<C64>::zeros(3);
            for (j, lam) in lambdas.iter().enumerate() {
                let w = lam.powi(k as i32);
                col = col + phi.column(j).mapv(|v| v * w);
            }
            seq.column_mut(k).assign(&col);
        }
        let model =
            DmdModel::fit(seq.view(), &DmdConfig { svd_rank: 3, ..Default::default() }, 0).unwrap();
        let stabilized = model.stabilize(1e-3).unwrap();

        assert_eq!(stabilized.eigenvalues().len(), 1);
        assert!((stabilized.eigenvalues()[0] - c(1.0, 0.0)).norm() < 1e-6);
        let mut dispositions: Vec<(f64, Disposition)> = stabilized
            .stabilization_record()
            .iter()
            .map(|e| (e.original.norm(), e.disposition))
            .collect();
        dispositions.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        assert_eq!(dispositions[0].1, Disposition::DiscardedConvergent); // 0.5
        assert_eq!(dispositions[1].1, Disposition::KeptNormalized); // 1.0005
        assert_eq!(dispositions[2].1, Disposition::DiscardedDivergent); // 1.2i
        // unit-modulus postcondition holds exactly
        for l in stabilized.eigenvalues() {
            assert_eq!(l.norm(), 1.0);
        }
    }

    #[test]
    fn stabilize_keeps_on_circle_spectra_unchanged() {
        let omega = 0.9_f64;
        let n = 24;
        let signal: Vec<f64> = (0..n).map(|k| (omega * k as f64).cos()).collect();
        let seq = real_seq(&[signal]);
        let config = DmdConfig { svd_rank: 2, hodmd_depth: 2, ..Default::default() };
        let model = DmdModel::fit(seq.view(), &config, 0).unwrap();
        let stabilized = model.stabilize(1e-3).unwrap();
        assert_eq!(stabilized.eigenvalues().len(), model.eigenvalues().len());
        assert!(stabilized
            .stabilization_record()
            .iter()
            .all(|e| e.disposition == Disposition::KeptNormalized));
        for (a, b) in stabilized.eigenvalues().iter().zip(model.eigenvalues()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn stabilization_is_idempotent() {
        let lambdas = [c(1.0005, 0.0), c(0.5, 0.0), c(0.0, 1.2)];
        let phi = array![
            [c(1.0, 0.0), c(1.0, 0.0), c(0.5, 0.0)],
            [c(0.5, 0.0), c(-1.0, 0.0), c(1.0, 0.0)],
            [c(1.0, 0.0), c(0.3, 0.0), c(-2.0, 0.0)]
        ];
        let n = 14;
        let mut seq = Array2::<C64>::zeros((3, n));
        for k in 0..n {
            let mut col = Array1::<C64>::zeros(3);
            for (j, lam) in lambdas.iter().enumerate() {
                let w = lam.powi(k as i32);
                col = col + phi.column(j).mapv(|v| v * w);
            }
            seq.column_mut(k).assign(&col);
        }
        let model =
            DmdModel::fit(seq.view(), &DmdConfig { svd_rank: 3, ..Default::default() }, 0).unwrap();
        let once = model.stabilize(1e-3).unwrap();
        let twice = once.stabilize(1e-3).unwrap();
        assert_eq!(once.eigenvalues(), twice.eigenvalues());
        assert_eq!(once.amplitudes(), twice.amplitudes());
        let d1: Vec<_> = once.stabilization_record().iter().map(|e| e.disposition).collect();
        let d2: Vec<_> = twice.stabilization_record().iter().map(|e| e.disposition).collect();
        assert_eq!(d1, d2);
    }

    #[test]
    fn stabilize_can_empty_the_spectrum() {
        let seq = real_seq(&[
            (0..10).map(|k| 0.5_f64.powi(k)).collect::<Vec<_>>(),
        ]);
        let model =
            DmdModel::fit(seq.view(), &DmdConfig { svd_rank: 1, ..Default::default() }, 0).unwrap();
        assert!(matches!(model.stabilize(1e-3), Err(DmdError::EmptySpectrum)));
    }

    #[test]
    fn conjugate_symmetry_for_real_sequences() {
        let n = 32;
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        let t = k as f64;
                        (0.3 * t + i as f64).sin() + 0.5 * (0.9 * t).cos() * 0.95_f64.powi(k as i32)
                    })
                    .collect()
            })
            .collect();
        let seq = real_seq(&rows);
        let config = DmdConfig { svd_rank: 0, hodmd_depth: 2, ..Default::default() };
        let model = DmdModel::fit(seq.view(), &config, 0).unwrap();
        for l in model.eigenvalues() {
            let conj = l.conj();
            assert!(
                model.eigenvalues().iter().any(|m| (m - conj).norm() < 1e-8),
                "eigenvalue {l} lacks a conjugate partner"
            );
        }
        let forecast = model.forecast(n as i64 + 3).unwrap();
        let norm = vector_norm(&forecast);
        for v in &forecast {
            assert!(v.im.abs() < 1e-8 * norm);
        }
    }

    #[test]
    fn spectrum_subset_property_on_random_linear_systems() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for trial in 0..20 {
            let s = 2 + trial % 2;
            // well-separated spectrum via a random similarity transform
            let eigs: Vec<f64> = (0..s).map(|i| 0.4 + 0.45 * i as f64).collect();
            let mut q = Array2::<C64>::zeros((s, s));
            loop {
                for v in q.iter_mut() {
                    *v = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                }
                use ndarray_linalg::Determinant;
                if q.det().map(|d| d.norm() > 0.2).unwrap_or(false) {
                    break;
                }
            }
            let qinv = ndarray_linalg::Inverse::inv(&*q).unwrap();
            let mut d = Array2::<C64>::zeros((s, s));
            for (i, &e) in eigs.iter().enumerate() {
                d[[i, i]] = c(e, 0.0);
            }
            let a = q.dot(&d).dot(&qinv);
            let x1 = Array1::from_shape_fn(s, |_| c(rng.random_range(0.2..1.0), 0.0));
            let seq = linear_trajectory(&a, &x1, 12);
            let config = DmdConfig { svd_rank: s, ..Default::default() };
            let model = DmdModel::fit(seq.view(), &config, 0).unwrap();
            for l in model.eigenvalues() {
                assert!(
                    eigs.iter().any(|&e| (l - c(e, 0.0)).norm() < 1e-8),
                    "trial {trial}: eigenvalue {l} not in the constructed spectrum"
                );
            }
        }
    }

    #[test]
    fn in_sample_reconstruction_error_on_exact_rank_data() {
        let a = array![[c(0.95, 0.1), c(0.0, 0.0)], [c(0.02, 0.0), c(0.7, -0.3)]];
        let x1 = array![c(1.0, 0.0), c(0.5, 0.5)];
        let seq = linear_trajectory(&a, &x1, 10);
        let config = DmdConfig { svd_rank: 2, ..Default::default() };
        let model = DmdModel::fit(seq.view(), &config, 0).unwrap();
        assert!(model.one_step_residual_rel() < 1e-8);
        for k in 0..10 {
            let forecast = model.forecast(k as i64).unwrap();
            let truth = seq.column(k as usize);
            let err = vector_norm(&(&forecast - &truth.to_owned()));
            assert!(err < 1e-8 * vector_norm(&truth.to_owned()));
        }
    }

    #[test]
    fn rank_request_beyond_numerical_rank_truncates_with_record() {
        // rank-1 data, requested rank 2
        let a = array![[c(0.9, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.9, 0.0)]];
        let x1 = array![c(1.0, 0.0), c(2.0, 0.0)];
        let seq = linear_trajectory(&a, &x1, 8);
        let config = DmdConfig { svd_rank: 2, ..Default::default() };
        let model = DmdModel::fit(seq.view(), &config, 0).unwrap();
        let trunc = model.rank_truncation().expect("truncation must be recorded");
        assert_eq!(trunc.requested, 2);
        assert_eq!(trunc.effective, 1);
        assert_eq!(model.eigenvalues().len(), 1);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let seq = real_seq(&[vec![1.0, 2.0]]);
        assert!(matches!(
            DmdModel::fit(seq.view(), &DmdConfig { hodmd_depth: 0, ..Default::default() }, 0),
            Err(DmdError::InvalidDepth(0))
        ));
        assert!(matches!(
            DmdModel::fit(seq.view(), &DmdConfig { hodmd_depth: 2, ..Default::default() }, 0),
            Err(DmdError::TooFewSnapshots { .. })
        ));
        assert!(matches!(
            DmdModel::fit(seq.view(), &DmdConfig { svd_rank: 5, ..Default::default() }, 0),
            Err(DmdError::RankOutOfBounds { .. })
        ));
        let zeros = Array2::<C64>::zeros((2, 5));
        assert!(matches!(
            DmdModel::fit(zeros.view(), &DmdConfig::default(), 0),
            Err(DmdError::ZeroData)
        ));
    }

    #[test]
    fn unit_circle_projection_is_exact() {
        for k in 0..2000 {
            let theta = k as f64 * 0.01 + 0.003;
            let z = c(theta.cos() * 1.0003, theta.sin() * 1.0003);
            let projected = project_onto_unit_circle(z);
            assert_eq!(projected.norm(), 1.0, "theta={theta}");
            // direction is preserved to first order
            assert!((projected - z / z.norm()).norm() < 1e-12);
        }
    }
}
