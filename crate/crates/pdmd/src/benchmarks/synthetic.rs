//! Synthetic linear system with unit-modulus dynamics polluted by one slowly
//! divergent mode, the stand-in for stabilization studies on flow-like data.
//!
//! Snapshots follow `x_k = sum_j phi_j e^{i theta_j k} + a psi rho^k e^{i theta_u k}`
//! with orthonormal seeded directions. The divergent term models a numerical
//! artifact on top of stable physics, so the forecasting ground truth is the
//! stable part alone; the generator keeps both parts evaluable.

use ndarray::{Array1, Array2};
use ndarray_linalg::QR;
use rand::Rng;
use rand::SeedableRng;
use thiserror::Error;

use crate::store::{ParameterPoint, ParametricSnapshotSet, SnapshotMatrix, StoreError, TimeAxis};
use crate::C64;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SyntheticUnstableSpec {
    /// State dimension s.
    pub state_dim: usize,
    /// Angular frequencies of the unit-modulus eigenvalues, radians per label.
    pub stable_frequencies: Vec<f64>,
    /// Modulus of the injected divergent eigenvalue.
    pub unstable_modulus: f64,
    /// Amplitude of the divergent term relative to one stable mode.
    pub unstable_fraction: f64,
    /// Angular frequency of the divergent eigenvalue.
    pub unstable_frequency: f64,
    /// Number of training snapshots N.
    pub time_samples: usize,
    pub seed: u64,
}

impl Default for SyntheticUnstableSpec {
    fn default() -> Self {
        Self {
            state_dim: 8,
            stable_frequencies: vec![0.4, 1.1, 2.3],
            unstable_modulus: 1.02,
            unstable_fraction: 0.01,
            unstable_frequency: 0.9,
            time_samples: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum SyntheticError {
    #[error("synthetic spec invalid: {0}")]
    BadSpec(String),
    #[error("{0}")]
    Store(#[from] StoreError),
    #[error("linear algebra backend failed: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

impl SyntheticUnstableSpec {
    pub fn validate(&self) -> Result<(), SyntheticError> {
        let modes = self.stable_frequencies.len();
        if modes == 0 {
            return Err(SyntheticError::BadSpec("at least one stable frequency".into()));
        }
        if self.state_dim < modes + 1 {
            return Err(SyntheticError::BadSpec(format!(
                "state dimension {} too small for {} stable modes plus one unstable direction",
                self.state_dim, modes
            )));
        }
        if self.time_samples < modes + 2 {
            return Err(SyntheticError::BadSpec(format!(
                "need at least {} snapshots, got {}",
                modes + 2,
                self.time_samples
            )));
        }
        if !(self.unstable_modulus >= 1.0) {
            return Err(SyntheticError::BadSpec(format!(
                "unstable modulus must be at least 1, got {}",
                self.unstable_modulus
            )));
        }
        if !(0.0..1.0).contains(&self.unstable_fraction) {
            return Err(SyntheticError::BadSpec(format!(
                "unstable fraction must lie in [0, 1), got {}",
                self.unstable_fraction
            )));
        }
        Ok(())
    }
}

/// The generator: seeded orthonormal directions plus the spec, able to
/// produce training data and exact truth at any label.
#[derive(Debug, Clone)]
pub struct SyntheticUnstable {
    spec: SyntheticUnstableSpec,
    /// s x (J + 1): stable directions, unstable direction last.
    directions: Array2<C64>,
}

impl SyntheticUnstable {
    pub fn generate(spec: &SyntheticUnstableSpec) -> Result<Self, SyntheticError> {
        spec.validate()?;
        let s = spec.state_dim;
        let count = spec.stable_frequencies.len() + 1;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(spec.seed);
        let gaussian = Array2::from_shape_fn((s, count), |_| {
            C64::new(standard_normal(&mut rng), standard_normal(&mut rng))
        });
        let (q, _r) = gaussian.qr()?;
        Ok(Self { spec: spec.clone(), directions: q })
    }

    pub fn spec(&self) -> &SyntheticUnstableSpec {
        &self.spec
    }

    /// Stable dynamics only: the forecasting ground truth.
    pub fn stable_truth(&self, label: i64) -> Array1<C64> {
        let mut x = Array1::<C64>::zeros(self.spec.state_dim);
        for (j, &freq) in self.spec.stable_frequencies.iter().enumerate() {
            let weight = C64::new(0.0, freq * label as f64).exp();
            x = x + self.directions.column(j).mapv(|v| v * weight);
        }
        x
    }

    /// Stable dynamics plus the divergent artifact: what gets sampled.
    pub fn polluted_state(&self, label: i64) -> Array1<C64> {
        let spec = &self.spec;
        let unstable_col = spec.stable_frequencies.len();
        let growth = spec.unstable_modulus.powi(label as i32);
        let weight = C64::new(0.0, spec.unstable_frequency * label as f64).exp()
            * C64::new(spec.unstable_fraction * growth, 0.0);
        self.stable_truth(label) + self.directions.column(unstable_col).mapv(|v| v * weight)
    }

    /// Training set sampled from the polluted trajectory at labels
    /// `0..time_samples`, as a single-member parametric set.
    pub fn training_set(&self) -> Result<ParametricSnapshotSet, SyntheticError> {
        let n = self.spec.time_samples;
        let mut values = Array2::<C64>::zeros((self.spec.state_dim, n));
        for k in 0..n {
            values.column_mut(k).assign(&self.polluted_state(k as i64));
        }
        let axis = TimeAxis::new(0.0, 1.0, n, 0)?;
        Ok(ParametricSnapshotSet::new(
            axis,
            "synthetic-unstable",
            vec![SnapshotMatrix::new(ParameterPoint::from(0.0), values)],
        )?)
    }
}

fn standard_normal(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    // Box-Muller from two uniforms
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmd::{DmdConfig, DmdModel, Disposition};
    use crate::pod::vector_norm;

    #[test]
    fn directions_are_orthonormal() {
        let gen = SyntheticUnstable::generate(&SyntheticUnstableSpec::default()).unwrap();
        let q = &gen.directions;
        for i in 0..q.ncols() {
            for j in 0..q.ncols() {
                let dot: C64 = q.column(i).iter().zip(q.column(j)).map(|(a, b)| a.conj() * b).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - C64::new(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_fraction_gives_unit_modulus_spectra() {
        let spec = SyntheticUnstableSpec { unstable_fraction: 0.0, ..Default::default() };
        let gen = SyntheticUnstable::generate(&spec).unwrap();
        let set = gen.training_set().unwrap();
        let model = DmdModel::fit(
            set.members()[0].values().view(),
            &DmdConfig::default(),
            0,
        )
        .unwrap();
        assert_eq!(model.eigenvalues().len(), spec.stable_frequencies.len());
        for l in model.eigenvalues() {
            assert!((l.norm() - 1.0).abs() < 1e-8, "eigenvalue {l} off the circle");
        }
    }

    #[test]
    fn stabilization_discards_exactly_the_divergent_mode() {
        let gen = SyntheticUnstable::generate(&SyntheticUnstableSpec::default()).unwrap();
        let set = gen.training_set().unwrap();
        let model =
            DmdModel::fit(set.members()[0].values().view(), &DmdConfig::default(), 0).unwrap();
        assert_eq!(model.eigenvalues().len(), 4);
        let stabilized = model.stabilize(1e-3).unwrap();
        let discarded: Vec<_> = stabilized
            .stabilization_record()
            .iter()
            .filter(|e| e.disposition == Disposition::DiscardedDivergent)
            .collect();
        assert_eq!(discarded.len(), 1);
        assert!((discarded[0].original.norm() - 1.02).abs() < 1e-6);
        assert!(stabilized
            .stabilization_record()
            .iter()
            .all(|e| e.disposition != Disposition::DiscardedConvergent));
    }

    #[test]
    fn stabilized_forecast_recovers_the_stable_truth() {
        let gen = SyntheticUnstable::generate(&SyntheticUnstableSpec::default()).unwrap();
        let set = gen.training_set().unwrap();
        let model =
            DmdModel::fit(set.members()[0].values().view(), &DmdConfig::default(), 0).unwrap();
        let stabilized = model.stabilize(1e-3).unwrap();
        for label in [150i64, 300] {
            let truth = gen.stable_truth(label);
            let forecast = stabilized.forecast(label).unwrap();
            let err = vector_norm(&(&forecast - &truth)) / vector_norm(&truth);
            assert!(err < 1e-8, "label {label}: stabilized error {err}");
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let spec = SyntheticUnstableSpec::default();
        let a = SyntheticUnstable::generate(&spec).unwrap().training_set().unwrap();
        let b = SyntheticUnstable::generate(&spec).unwrap().training_set().unwrap();
        assert_eq!(a, b);
        let other = SyntheticUnstableSpec { seed: 1, ..spec };
        let c = SyntheticUnstable::generate(&other).unwrap().training_set().unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn spec_validation_rejects_inconsistent_fields() {
        let base = SyntheticUnstableSpec::default();
        assert!(SyntheticUnstableSpec { state_dim: 3, ..base.clone() }.validate().is_err());
        assert!(SyntheticUnstableSpec { unstable_modulus: 0.9, ..base.clone() }
            .validate()
            .is_err());
        assert!(SyntheticUnstableSpec { unstable_fraction: 1.0, ..base.clone() }
            .validate()
            .is_err());
        assert!(SyntheticUnstableSpec { time_samples: 3, ..base }.validate().is_err());
    }
}
