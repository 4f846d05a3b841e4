//! Nonlinear unsteady heat benchmark on the unit square.
//!
//! `du/dt - lap(u) = A sin(2 pi x1) sin(2 pi x2) sin(2 pi t) - (mu1/mu2)(e^{mu2 u} - 1)`
//! with homogeneous Dirichlet walls and `u(., 0) = 0`, for parameters
//! `(mu1, mu2)` in `[0.01, 10]^2`. Discretized with second-order central
//! differences on a uniform interior grid; time stepping is semi-implicit:
//! the diffusion term is advanced with a backward Euler solve through a
//! Cholesky factorization computed once per run, the source and the
//! exponential reaction term stay explicit. Snapshots are stored at labels
//! 0..=100 covering `t in [0, 2]`, with a fixed number of substeps per label
//! and step-halving retries when the explicit reaction destabilizes a run.

use ndarray::{Array1, Array2};
use ndarray_linalg::cholesky::{FactorizeC, SolveC};
use ndarray_linalg::UPLO;
use rand::Rng;
use rand::SeedableRng;
use rayon::prelude::*;
use thiserror::Error;

use crate::store::{ParameterPoint, ParametricSnapshotSet, SnapshotMatrix, StoreError, TimeAxis};
use crate::C64;

/// Snapshot labels 0..=100 over `t in [0, 2]`.
pub const LABEL_COUNT: usize = 101;
pub const LABEL_DT: f64 = 0.02;
/// Parameter box of the benchmark.
pub const PARAMETER_BOX: ((f64, f64), (f64, f64)) = ((0.01, 10.0), (0.01, 10.0));
/// Central region the held-out parameters are drawn from, comfortably inside
/// the convex hull of any reasonably spread training sample.
const HOLDOUT_BOX: ((f64, f64), (f64, f64)) = ((2.0, 8.0), (2.0, 8.0));

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HeatSpec {
    /// Interior nodes per axis.
    pub grid: usize,
    /// Solver substeps per snapshot label.
    pub substeps: usize,
    /// Forcing amplitude; physically 100, scalable to 0 as a test hook.
    pub source_amplitude: f64,
}

impl Default for HeatSpec {
    fn default() -> Self {
        Self { grid: 31, substeps: 10, source_amplitude: 100.0 }
    }
}

#[derive(Debug, Error)]
pub enum HeatError {
    #[error("heat spec invalid: {0}")]
    BadSpec(String),
    #[error("solver diverged for mu = ({mu1}, {mu2}) even after {retries} step-halving retries")]
    Divergence { mu1: f64, mu2: f64, retries: usize },
    #[error("{0}")]
    Store(#[from] StoreError),
    #[error("linear algebra backend failed: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

impl HeatSpec {
    pub fn validate(&self) -> Result<(), HeatError> {
        if self.grid < 4 {
            return Err(HeatError::BadSpec(format!("grid must be at least 4, got {}", self.grid)));
        }
        if self.substeps == 0 {
            return Err(HeatError::BadSpec("substeps must be positive".into()));
        }
        if !self.source_amplitude.is_finite() {
            return Err(HeatError::BadSpec("source amplitude must be finite".into()));
        }
        Ok(())
    }

    pub fn time_axis(&self) -> TimeAxis {
        TimeAxis::new(0.0, LABEL_DT, LABEL_COUNT, 0).expect("constants are valid")
    }

    /// Interior node count `grid^2`; node `(ix, iy)` maps to row `ix + grid*iy`
    /// at coordinates `((ix+1) h, (iy+1) h)` with `h = 1/(grid+1)`.
    pub fn space_dim(&self) -> usize {
        self.grid * self.grid
    }
}

/// Solves one parameter instance over the full label window.
pub fn solve(spec: &HeatSpec, mu: (f64, f64)) -> Result<SnapshotMatrix, HeatError> {
    spec.validate()?;
    let (mu1, mu2) = mu;
    if mu2 <= 0.0 {
        return Err(HeatError::BadSpec(format!("mu2 must be positive, got {mu2}")));
    }
    const MAX_RETRIES: usize = 3;
    let mut substeps = spec.substeps;
    for _retry in 0..=MAX_RETRIES {
        match attempt_solve(spec, mu1, mu2, substeps)? {
            Some(values) => {
                return Ok(SnapshotMatrix::new(
                    ParameterPoint::new(vec![mu1, mu2]).expect("finite coordinates"),
                    values,
                ))
            }
            None => substeps *= 2,
        }
    }
    Err(HeatError::Divergence { mu1, mu2, retries: MAX_RETRIES })
}

/// One full integration; `None` signals divergence at this substep size.
fn attempt_solve(
    spec: &HeatSpec,
    mu1: f64,
    mu2: f64,
    substeps: usize,
) -> Result<Option<Array2<C64>>, HeatError> {
    let g = spec.grid;
    let m = spec.space_dim();
    let tau = LABEL_DT / substeps as f64;
    let h = 1.0 / (g + 1) as f64;

    // I - tau * L for the 5-point Dirichlet Laplacian, factored once
    let mut system = Array2::<f64>::zeros((m, m));
    let idx = |ix: usize, iy: usize| ix + g * iy;
    let w = tau / (h * h);
    for iy in 0..g {
        for ix in 0..g {
            let row = idx(ix, iy);
            system[[row, row]] = 1.0 + 4.0 * w;
            if ix > 0 {
                system[[row, idx(ix - 1, iy)]] = -w;
            }
            if ix + 1 < g {
                system[[row, idx(ix + 1, iy)]] = -w;
            }
            if iy > 0 {
                system[[row, idx(ix, iy - 1)]] = -w;
            }
            if iy + 1 < g {
                system[[row, idx(ix, iy + 1)]] = -w;
            }
        }
    }
    let factor = system.factorizec(UPLO::Lower)?;

    // spatial forcing shape on the interior nodes
    let shape = Array1::from_shape_fn(m, |row| {
        let (ix, iy) = (row % g, row / g);
        let (x1, x2) = ((ix + 1) as f64 * h, (iy + 1) as f64 * h);
        (2.0 * std::f64::consts::PI * x1).sin() * (2.0 * std::f64::consts::PI * x2).sin()
    });

    let mut snapshots = Array2::<C64>::zeros((m, LABEL_COUNT));
    let mut u = Array1::<f64>::zeros(m);
    for label in 1..LABEL_COUNT {
        for sub in 0..substeps {
            let t = (label - 1) as f64 * LABEL_DT + sub as f64 * tau;
            let forcing = spec.source_amplitude * forcing_wave(t);
            let rhs = Array1::from_shape_fn(m, |row| {
                let reaction = mu1 / mu2 * ((mu2 * u[row]).exp() - 1.0);
                u[row] + tau * (forcing * shape[row] - reaction)
            });
            u = factor.solvec(&rhs)?;
            if u.iter().any(|v| !v.is_finite() || v.abs() > 1e6) {
                return Ok(None);
            }
        }
        let col = u.mapv(|v| C64::new(v, 0.0));
        snapshots.column_mut(label).assign(&col);
    }
    Ok(Some(snapshots))
}

/// Temporal factor of the source; exactly zero at every half-period.
pub fn forcing_wave(t: f64) -> f64 {
    (2.0 * std::f64::consts::PI * t).sin()
}

/// Solves every parameter instance (in parallel) and assembles the set.
pub fn generate_set(
    spec: &HeatSpec,
    parameters: &[(f64, f64)],
) -> Result<ParametricSnapshotSet, HeatError> {
    spec.validate()?;
    if parameters.is_empty() {
        return Err(HeatError::BadSpec("at least one parameter required".into()));
    }
    let members = parameters
        .par_iter()
        .map(|&mu| solve(spec, mu))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ParametricSnapshotSet::new(spec.time_axis(), "heat", members)?)
}

/// Stratified (Latin-hypercube style) training parameters over the full box
/// plus held-out validation parameters from the central region, drawn from
/// one seeded stream. Training and held-out points never coincide.
pub fn sample_parameters(
    train_count: usize,
    holdout_count: usize,
    seed: u64,
) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let train = latin_hypercube(train_count, PARAMETER_BOX, &mut rng);
    let holdout = latin_hypercube(holdout_count, HOLDOUT_BOX, &mut rng);
    (train, holdout)
}

fn latin_hypercube(
    count: usize,
    bounds: ((f64, f64), (f64, f64)),
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<(f64, f64)> {
    use rand::seq::SliceRandom;
    if count == 0 {
        return Vec::new();
    }
    let ((lo1, hi1), (lo2, hi2)) = bounds;
    let mut strata: Vec<usize> = (0..count).collect();
    strata.shuffle(rng);
    (0..count)
        .map(|i| {
            let u1: f64 = rng.random_range(0.0..1.0);
            let u2: f64 = rng.random_range(0.0..1.0);
            (
                lo1 + (hi1 - lo1) * (i as f64 + u1) / count as f64,
                lo2 + (hi2 - lo2) * (strata[i] as f64 + u2) / count as f64,
            )
        })
        .collect()
}
