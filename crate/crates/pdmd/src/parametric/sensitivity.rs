//! Sensitivity experiments: error as a function of the training-set size in
//! parameters and of the training window length in time. Each table row comes
//! from a full retrain on the reduced training data.

use rand::seq::SliceRandom;
use rand::SeedableRng;

use super::{ParametricDmdModel, ParametricError, Variant};
use crate::dmd::DmdConfig;
use crate::regression::RegressorSpec;
use crate::store::{ParameterPoint, ParametricSnapshotSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensitivityMode {
    Parameter,
    Time,
}

impl std::fmt::Display for SensitivityMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SensitivityMode::Parameter => f.write_str("parameter"),
            SensitivityMode::Time => f.write_str("time"),
        }
    }
}

/// Shared retraining configuration for both experiment drivers.
#[derive(Debug, Clone)]
pub struct SensitivityConfig {
    pub variant: Variant,
    pub pod_rank: usize,
    pub dmd_config: DmdConfig,
    pub regressors: Vec<RegressorSpec>,
    /// Label the error is probed at; must be covered by the truth set.
    pub probe_label: i64,
    /// Inclusive label window used for training (the fixed time frame of the
    /// parameter experiment, the largest window of the time experiment).
    pub train_window: (i64, i64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRow {
    pub step: usize,
    /// Subset size (parameter mode) or window length (time mode).
    pub size: usize,
    pub regressor: String,
    pub e_i: f64,
}

#[derive(Debug, Clone)]
pub struct SensitivityTable {
    pub mode: SensitivityMode,
    /// Seed behind the schedule randomness, when any.
    pub seed: Option<u64>,
    pub probe_label: i64,
    pub rows: Vec<SensitivityRow>,
}

/// Nested training subsets, as member indices into the training pool.
#[derive(Debug, Clone)]
pub struct ParameterSchedule {
    subsets: Vec<Vec<usize>>,
    seed: Option<u64>,
}

impl ParameterSchedule {
    /// Random growth: a seeded initial subset of `initial` members extended by
    /// one random remaining member per step. Indices listed in `anchors` are
    /// always part of the initial subset, which keeps the interpolation hull
    /// fixed across the whole schedule.
    pub fn grow_random(
        pool_size: usize,
        initial: usize,
        steps: usize,
        seed: u64,
        anchors: &[usize],
    ) -> Result<Self, ParametricError> {
        if initial == 0 || initial > pool_size {
            return Err(ParametricError::Schedule(format!(
                "initial subset size {initial} outside 1..={pool_size}"
            )));
        }
        if initial + steps > pool_size {
            return Err(ParametricError::Schedule(format!(
                "{steps} growth steps from size {initial} exceed the pool of {pool_size}"
            )));
        }
        if anchors.len() > initial {
            return Err(ParametricError::Schedule(format!(
                "{} anchors do not fit into the initial subset of {initial}",
                anchors.len()
            )));
        }
        if let Some(&bad) = anchors.iter().find(|&&a| a >= pool_size) {
            return Err(ParametricError::Schedule(format!(
                "anchor index {bad} outside the pool of {pool_size}"
            )));
        }

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut remaining: Vec<usize> =
            (0..pool_size).filter(|i| !anchors.contains(i)).collect();
        remaining.shuffle(&mut rng);
        let mut current: Vec<usize> = anchors.to_vec();
        current.extend(remaining.drain(..initial - anchors.len()));
        current.sort_unstable();

        let mut subsets = vec![current.clone()];
        for _ in 0..steps {
            current.push(remaining.pop().expect("bounds checked above"));
            current.sort_unstable();
            subsets.push(current.clone());
        }
        Ok(Self { subsets, seed: Some(seed) })
    }

    /// Explicit subsets; each must contain the previous one.
    pub fn from_subsets(subsets: Vec<Vec<usize>>) -> Result<Self, ParametricError> {
        if subsets.is_empty() {
            return Err(ParametricError::Schedule("no subsets given".into()));
        }
        for window in subsets.windows(2) {
            if !window[0].iter().all(|i| window[1].contains(i)) {
                return Err(ParametricError::Schedule(
                    "subsets are not nested: an earlier member disappears later".into(),
                ));
            }
        }
        Ok(Self { subsets, seed: None })
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }
}

/// Prefix-extension schedule of training windows.
#[derive(Debug, Clone, Copy)]
pub struct TimeSchedule {
    /// Length of the first window, in labels.
    pub initial_len: usize,
    /// Number of one-label extensions.
    pub steps: usize,
}

/// Error as a function of the number of training parameters, the time frame
/// held fixed. One row per (subset, regressor).
pub fn run_parameter_sensitivity(
    pool: &ParametricSnapshotSet,
    truth: &ParametricSnapshotSet,
    schedule: &ParameterSchedule,
    config: &SensitivityConfig,
) -> Result<SensitivityTable, ParametricError> {
    let window = pool.restrict_labels(config.train_window.0, config.train_window.1)?;
    let mut rows = Vec::new();
    for (step, subset) in schedule.subsets.iter().enumerate() {
        let training = window.select_members(subset)?;
        check_disjoint(&training, truth)?;
        let model = fit_variant(&training, config)?;
        for spec in &config.regressors {
            let report = model.compute_error_report(truth, &[config.probe_label], Some(*spec))?;
            rows.push(SensitivityRow {
                step,
                size: subset.len(),
                regressor: spec.kind.to_string(),
                e_i: report.e_i()[0],
            });
        }
    }
    Ok(SensitivityTable {
        mode: SensitivityMode::Parameter,
        seed: schedule.seed,
        probe_label: config.probe_label,
        rows,
    })
}

/// Error as a function of the training-window length, the parameter set held
/// fixed. Windows grow one label at a time from `initial_len` labels.
pub fn run_time_sensitivity(
    pool: &ParametricSnapshotSet,
    truth: &ParametricSnapshotSet,
    schedule: &TimeSchedule,
    config: &SensitivityConfig,
) -> Result<SensitivityTable, ParametricError> {
    if schedule.initial_len < 2 {
        return Err(ParametricError::Schedule(format!(
            "initial window of {} labels is too short",
            schedule.initial_len
        )));
    }
    let start = config.train_window.0;
    let last_end = start + (schedule.initial_len + schedule.steps) as i64 - 1;
    if last_end > config.train_window.1 {
        return Err(ParametricError::Schedule(format!(
            "window grows to label {last_end}, beyond the training window end {}",
            config.train_window.1
        )));
    }
    check_disjoint(pool, truth)?;
    let mut rows = Vec::new();
    for step in 0..=schedule.steps {
        let len = schedule.initial_len + step;
        let training = pool.restrict_labels(start, start + len as i64 - 1)?;
        let model = fit_variant(&training, config)?;
        for spec in &config.regressors {
            let report = model.compute_error_report(truth, &[config.probe_label], Some(*spec))?;
            rows.push(SensitivityRow {
                step,
                size: len,
                regressor: spec.kind.to_string(),
                e_i: report.e_i()[0],
            });
        }
    }
    Ok(SensitivityTable {
        mode: SensitivityMode::Time,
        seed: None,
        probe_label: config.probe_label,
        rows,
    })
}

fn fit_variant(
    training: &ParametricSnapshotSet,
    config: &SensitivityConfig,
) -> Result<ParametricDmdModel, ParametricError> {
    match config.variant {
        Variant::Monolithic => {
            ParametricDmdModel::fit_monolithic(training, config.pod_rank, &config.dmd_config)
        }
        Variant::Partitioned => {
            ParametricDmdModel::fit_partitioned(training, config.pod_rank, &config.dmd_config)
        }
    }
}

fn check_disjoint(
    training: &ParametricSnapshotSet,
    truth: &ParametricSnapshotSet,
) -> Result<(), ParametricError> {
    for member in truth.members() {
        if training.members().iter().any(|m| m.parameter() == member.parameter()) {
            return Err(ParametricError::HeldOutOverlap(member.parameter().clone()));
        }
    }
    Ok(())
}

/// Indices of the members whose parameters span the interpolation hull:
/// the extremes in 1-D, the convex hull vertices in 2-D, the per-coordinate
/// extremes beyond.
pub fn hull_anchor_indices(parameters: &[ParameterPoint]) -> Vec<usize> {
    if parameters.is_empty() {
        return Vec::new();
    }
    let dim = parameters[0].dim();
    let mut anchors: Vec<usize> = match dim {
        1 => {
            let min = (0..parameters.len())
                .min_by(|&a, &b| {
                    parameters[a].coords()[0].partial_cmp(&parameters[b].coords()[0]).unwrap()
                })
                .unwrap();
            let max = (0..parameters.len())
                .max_by(|&a, &b| {
                    parameters[a].coords()[0].partial_cmp(&parameters[b].coords()[0]).unwrap()
                })
                .unwrap();
            vec![min, max]
        }
        2 => convex_hull_2d(parameters),
        _ => {
            let mut indices = Vec::new();
            for k in 0..dim {
                for extreme in [
                    (0..parameters.len()).min_by(|&a, &b| {
                        parameters[a].coords()[k].partial_cmp(&parameters[b].coords()[k]).unwrap()
                    }),
                    (0..parameters.len()).max_by(|&a, &b| {
                        parameters[a].coords()[k].partial_cmp(&parameters[b].coords()[k]).unwrap()
                    }),
                ] {
                    indices.extend(extreme);
                }
            }
            indices
        }
    };
    anchors.sort_unstable();
    anchors.dedup();
    anchors
}

/// Gift-wrapping convex hull, adequate for the small parameter sets here.
fn convex_hull_2d(parameters: &[ParameterPoint]) -> Vec<usize> {
    let pts: Vec<[f64; 2]> =
        parameters.iter().map(|p| [p.coords()[0], p.coords()[1]]).collect();
    let n = pts.len();
    if n < 3 {
        return (0..n).collect();
    }
    let start = (0..n)
        .min_by(|&a, &b| pts[a].partial_cmp(&pts[b]).unwrap())
        .unwrap();
    let mut hull = Vec::new();
    let mut current = start;
    loop {
        hull.push(current);
        let mut next = (current + 1) % n;
        for candidate in 0..n {
            if candidate == current {
                continue;
            }
            let cross = (pts[next][0] - pts[current][0]) * (pts[candidate][1] - pts[current][1])
                - (pts[next][1] - pts[current][1]) * (pts[candidate][0] - pts[current][0]);
            if cross < 0.0 {
                next = candidate;
            }
        }
        current = next;
        if current == start || hull.len() > n {
            break;
        }
    }
    hull
}
