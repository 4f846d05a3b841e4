//! Analytic benchmark: an affine blend of two space-time separable waves.
//!
//! `f(x, t, mu) = mu * sech(x + 3) e^{i 2.3 t} + (1 - mu) * 2 sech(x) tanh(x) e^{i 2.8 t}`
//! sampled on `x in [-5, 5]` and `t in [0, 4 pi]`, both endpoints included.
//! The field is exactly rank 2 in space and time and affine in the parameter,
//! so the whole forecasting pipeline can be checked against closed-form truth
//! to numerical precision, also beyond the sampled time window.

use ndarray::{Array1, Array2};

use crate::store::{ParameterPoint, ParametricSnapshotSet, SnapshotMatrix, StoreError, TimeAxis};
use crate::C64;

pub const FREQ_1: f64 = 2.3;
pub const FREQ_2: f64 = 2.8;
pub const SPACE_INTERVAL: (f64, f64) = (-5.0, 5.0);
pub const TIME_END: f64 = 4.0 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ToySpec {
    /// Spatial samples m over `[-5, 5]`.
    pub space_samples: usize,
    /// Time samples N over `[0, 4 pi]`.
    pub time_samples: usize,
    /// Training parameter values.
    pub parameters: Vec<f64>,
}

impl Default for ToySpec {
    fn default() -> Self {
        Self {
            space_samples: 1000,
            time_samples: 129,
            parameters: (0..10).map(|k| k as f64 / 10.0).collect(),
        }
    }
}

impl ToySpec {
    pub fn validate(&self) -> Result<(), StoreError> {
        if self.space_samples < 2 || self.time_samples < 2 {
            return Err(StoreError::BadTimeAxis {
                reason: format!(
                    "toy spec needs at least 2 samples per axis, got m={}, N={}",
                    self.space_samples, self.time_samples
                ),
            });
        }
        Ok(())
    }

    /// Time labels are 0-based: label k maps to `t = k * dt`, so label 128 is
    /// `4 pi` with the default spec and label 256 is `8 pi`.
    pub fn time_axis(&self) -> Result<TimeAxis, StoreError> {
        TimeAxis::new(0.0, TIME_END / (self.time_samples - 1) as f64, self.time_samples, 0)
    }

    pub fn space_grid(&self) -> Vec<f64> {
        let (lo, hi) = SPACE_INTERVAL;
        let m = self.space_samples;
        (0..m).map(|j| lo + (hi - lo) * j as f64 / (m - 1) as f64).collect()
    }
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// First spatial profile, `sech(x + 3)`.
fn profile_1(x: f64) -> f64 {
    sech(x + 3.0)
}

/// Second spatial profile, `2 sech(x) tanh(x)`.
fn profile_2(x: f64) -> f64 {
    2.0 * sech(x) * x.tanh()
}

fn phase(freq: f64, t: f64) -> C64 {
    C64::new(0.0, freq * t).exp()
}

/// Analytic field value.
pub fn field_value(x: f64, t: f64, mu: f64) -> C64 {
    phase(FREQ_1, t) * mu * profile_1(x) + phase(FREQ_2, t) * (1.0 - mu) * profile_2(x)
}

/// Samples the training set for all parameters in the spec.
pub fn generate(spec: &ToySpec) -> Result<ParametricSnapshotSet, StoreError> {
    spec.validate()?;
    let axis = spec.time_axis()?;
    let grid = spec.space_grid();
    let members = spec
        .parameters
        .iter()
        .map(|&mu| {
            let values = Array2::from_shape_fn((grid.len(), axis.count()), |(i, k)| {
                field_value(grid[i], axis.time_of(k as i64), mu)
            });
            SnapshotMatrix::new(ParameterPoint::from(mu), values)
        })
        .collect();
    ParametricSnapshotSet::new(axis, "toy", members)
}

/// Closed-form snapshot at any parameter and any label, also past the
/// training window; the exactness oracle for the toy acceptance tests.
pub fn truth(spec: &ToySpec, mu: f64, label: i64) -> Result<Array1<C64>, StoreError> {
    spec.validate()?;
    let axis = spec.time_axis()?;
    let t = axis.time_of(label);
    Ok(spec.space_grid().iter().map(|&x| field_value(x, t, mu)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pod::frobenius_norm;
    use ndarray_linalg::{JobSvd, SVDDC};

    fn small_spec() -> ToySpec {
        ToySpec { space_samples: 80, time_samples: 33, parameters: vec![0.0, 0.5, 1.0] }
    }

    #[test]
    fn endpoint_parameters_isolate_the_two_terms() {
        let spec = small_spec();
        let set = generate(&spec).unwrap();
        let grid = spec.space_grid();
        let axis = set.time_axis().clone();
        // mu = 0: pure second term; mu = 1: pure first term
        let cases: [(usize, Box<dyn Fn(f64, f64) -> C64>); 2] = [
            (0, Box::new(|x, t| phase(FREQ_2, t) * profile_2(x))),
            (2, Box::new(|x, t| phase(FREQ_1, t) * profile_1(x))),
        ];
        for (member, expected) in cases {
            let values = set.members()[member].values();
            for (i, &x) in grid.iter().enumerate().step_by(7) {
                for k in (0..axis.count()).step_by(5) {
                    let t = axis.time_of(k as i64);
                    assert!((values[[i, k]] - expected(x, t)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn every_member_has_numerical_rank_two() {
        let set = generate(&small_spec()).unwrap();
        for member in set.members() {
            let (_, s, _) = member.values().svddc(JobSvd::None).unwrap();
            assert!(s[2] / s[0] < 1e-10, "sigma_3/sigma_1 = {}", s[2] / s[0]);
        }
    }

    #[test]
    fn field_is_affine_in_the_parameter() {
        for (x, t) in [(-4.2, 0.0), (0.3, 1.7), (4.9, 11.0)] {
            let mid = field_value(x, t, 0.5);
            let blend = (field_value(x, t, 0.0) + field_value(x, t, 1.0)) * C64::new(0.5, 0.0);
            assert_eq!(mid, blend);
        }
    }

    #[test]
    fn default_spec_matches_the_reference_dimensions() {
        let spec = ToySpec::default();
        let set = generate(&spec).unwrap();
        assert_eq!(set.member_count(), 10);
        assert_eq!(set.space_dim(), 1000);
        assert_eq!(set.time_axis().count(), 129);
        assert_eq!(set.parameters()[3], ParameterPoint::from(0.3));
        let dt = set.time_axis().dt();
        assert!((dt - 4.0 * std::f64::consts::PI / 128.0).abs() < 1e-15);
        // label 128 is the end of the window, label 256 doubles it
        assert!((set.time_axis().time_of(128) - TIME_END).abs() < 1e-12);
        assert!((set.time_axis().time_of(256) - 2.0 * TIME_END).abs() < 1e-12);
    }

    #[test]
    fn truth_at_time_zero_is_the_blended_spatial_profile() {
        let spec = small_spec();
        let v = truth(&spec, 0.5, 0).unwrap();
        let grid = spec.space_grid();
        for (i, &x) in grid.iter().enumerate() {
            let expected = 0.5 * profile_1(x) + 0.5 * profile_2(x);
            assert!((v[i] - C64::new(expected, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn phase_periodicity_past_the_window() {
        // at t = 8 pi each pure term equals its t = 0 profile times exp(i w 8 pi)
        let spec = ToySpec { time_samples: 129, ..small_spec() };
        let t_end = 2.0 * TIME_END;
        let at_end = truth(&spec, 1.0, 256).unwrap();
        let at_zero = truth(&spec, 1.0, 0).unwrap();
        let rotation = phase(FREQ_1, t_end);
        for i in (0..spec.space_samples).step_by(11) {
            assert!((at_end[i] - at_zero[i] * rotation).norm() < 1e-12);
        }
    }

    #[test]
    fn generated_set_round_trips_through_truth() {
        let spec = small_spec();
        let set = generate(&spec).unwrap();
        let member = &set.members()[1];
        let col = member.values().column(20).to_owned();
        let expected = truth(&spec, 0.5, 20).unwrap();
        assert!(frobenius_norm((&col - &expected).insert_axis(ndarray::Axis(1)).view()) < 1e-13);
    }
}
