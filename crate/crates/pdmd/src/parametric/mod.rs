//! Offline/online pipeline for parametric forecasting.
//!
//! Offline: project all snapshots onto a shared POD basis and fit the reduced
//! dynamics, either as one operator over the vertically stacked coefficient
//! blocks of every parameter (monolithic) or as one operator per parameter
//! (partitioned). Online: forecast the reduced coefficients of every training
//! parameter at the requested label, regress them over the parameter space,
//! evaluate at the untested parameter and lift through the basis.

mod model_io;
mod report;
mod sensitivity;

pub use model_io::{read_model, write_model, ModelIoError};
pub use report::ErrorReport;
pub use sensitivity::{
    hull_anchor_indices, run_parameter_sensitivity, run_time_sensitivity, ParameterSchedule,
    SensitivityConfig, SensitivityMode, SensitivityRow, SensitivityTable, TimeSchedule,
};

use ndarray::{s, Array1, Array2, ShapeBuilder};
use rayon::prelude::*;
use thiserror::Error;

use crate::dmd::{DmdConfig, DmdError};
use crate::pod::{assemble_global_matrix, PodError};
use crate::regression::{RegressionError, RegressorSpec};
use crate::store::{ParameterPoint, ParametricSnapshotSet, StoreError, TimeAxis};
use crate::{C64, DmdModel, PodBasis};

#[derive(Debug, Error)]
pub enum ParametricError {
    #[error("{0}")]
    Store(#[from] StoreError),
    #[error("{0}")]
    Pod(#[from] PodError),
    #[error("dmd fit failed{}: {source}", parameter_context(.parameter))]
    Dmd { parameter: Option<ParameterPoint>, source: DmdError },
    #[error("{0}")]
    Regression(#[from] RegressionError),
    #[error("forecast request has no labels")]
    EmptyLabels,
    #[error("parameter dimension {found} does not match the training dimension {expected}")]
    ParameterDimMismatch { expected: usize, found: usize },
    #[error("label {label} not covered by the truth window {origin}..={last}")]
    LabelCoverage { label: i64, origin: i64, last: i64 },
    #[error("held-out parameter {0} also appears in the training subset")]
    HeldOutOverlap(ParameterPoint),
    #[error("invalid schedule: {0}")]
    Schedule(String),
}

fn parameter_context(parameter: &Option<ParameterPoint>) -> String {
    match parameter {
        Some(p) => format!(" for parameter {p}"),
        None => String::new(),
    }
}

impl From<DmdError> for ParametricError {
    fn from(source: DmdError) -> Self {
        Self::Dmd { parameter: None, source }
    }
}

/// How the reduced dynamics are fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// One operator over the stacked coefficients of all parameters.
    Monolithic,
    /// One operator per training parameter.
    Partitioned,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Monolithic => f.write_str("monolithic"),
            Variant::Partitioned => f.write_str("partitioned"),
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "monolithic" => Ok(Variant::Monolithic),
            "partitioned" => Ok(Variant::Partitioned),
            other => Err(format!("unknown variant '{other}' (expected monolithic|partitioned)")),
        }
    }
}

/// A forecast query: one parameter point, one or more time labels.
#[derive(Debug, Clone)]
pub struct ForecastRequest {
    pub parameter: ParameterPoint,
    pub labels: Vec<i64>,
    /// Overrides the model's online defaults when set.
    pub regressor: Option<RegressorSpec>,
}

/// Trained parametric model: shared POD basis plus the DMD operator(s).
#[derive(Debug, Clone)]
pub struct ParametricDmdModel {
    variant: Variant,
    pod: PodBasis,
    operators: Vec<DmdModel>,
    parameters: Vec<ParameterPoint>,
    time_axis: TimeAxis,
    dmd_config: DmdConfig,
    online_defaults: RegressorSpec,
    field_name: String,
}

impl ParametricDmdModel {
    /// Offline phase, monolithic: POD on the global matrix, then one DMD fit
    /// on the vertically stacked reduced blocks (state dimension `n * p`).
    pub fn fit_monolithic(
        set: &ParametricSnapshotSet,
        pod_rank: usize,
        config: &DmdConfig,
    ) -> Result<Self, ParametricError> {
        let (pod, blocks) = reduce(set, pod_rank)?;
        let p = set.member_count();
        let n = pod.rank();
        let mut stacked = Array2::<C64>::zeros((n * p, set.time_axis().count()));
        for (i, block) in blocks.iter().enumerate() {
            stacked.slice_mut(s![i * n..(i + 1) * n, ..]).assign(block);
        }
        let operator = DmdModel::fit(stacked.view(), config, set.time_axis().label_origin())?;
        Ok(Self {
            variant: Variant::Monolithic,
            pod,
            operators: vec![operator],
            parameters: set.parameters(),
            time_axis: *set.time_axis(),
            dmd_config: *config,
            online_defaults: RegressorSpec::default(),
            field_name: set.field_name().to_string(),
        })
    }

    /// Offline phase, partitioned: the same POD basis, then one independent
    /// DMD fit per parameter block. Any single failure aborts the whole fit,
    /// reporting the offending parameter.
    pub fn fit_partitioned(
        set: &ParametricSnapshotSet,
        pod_rank: usize,
        config: &DmdConfig,
    ) -> Result<Self, ParametricError> {
        let (pod, blocks) = reduce(set, pod_rank)?;
        let origin = set.time_axis().label_origin();
        let operators = blocks
            .par_iter()
            .enumerate()
            .map(|(i, block)| {
                DmdModel::fit(block.view(), config, origin).map_err(|source| {
                    ParametricError::Dmd {
                        parameter: Some(set.members()[i].parameter().clone()),
                        source,
                    }
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            variant: Variant::Partitioned,
            pod,
            operators,
            parameters: set.parameters(),
            time_axis: *set.time_axis(),
            dmd_config: *config,
            online_defaults: RegressorSpec::default(),
            field_name: set.field_name().to_string(),
        })
    }

    pub fn with_online_defaults(mut self, defaults: RegressorSpec) -> Self {
        self.online_defaults = defaults;
        self
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn pod(&self) -> &PodBasis {
        &self.pod
    }

    /// The fitted operators: one (monolithic) or p (partitioned).
    pub fn operators(&self) -> &[DmdModel] {
        &self.operators
    }

    pub fn parameters(&self) -> &[ParameterPoint] {
        &self.parameters
    }

    pub fn time_axis(&self) -> &TimeAxis {
        &self.time_axis
    }

    pub fn dmd_config(&self) -> &DmdConfig {
        &self.dmd_config
    }

    pub fn online_defaults(&self) -> &RegressorSpec {
        &self.online_defaults
    }

    pub fn field_name(&self) -> &str {
        &self.field_name
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters.len()
    }

    pub fn parameter_dim(&self) -> usize {
        self.parameters[0].dim()
    }

    /// Forecasted reduced coefficients at `label`, one column of length `n`
    /// per training parameter, in training member order.
    pub fn predict_reduced(&self, label: i64) -> Result<Array2<C64>, ParametricError> {
        let n = self.pod.rank();
        let p = self.parameters.len();
        match self.variant {
            Variant::Monolithic => {
                let stacked = self.operators[0].forecast(label)?;
                // blocks follow the member order, so column-major reshaping
                // splits them back into per-parameter columns
                Ok(Array2::from_shape_vec((n, p).f(), stacked.to_vec())
                    .expect("stacked forecast has n*p entries"))
            }
            Variant::Partitioned => {
                let mut columns = Array2::<C64>::zeros((n, p));
                for (i, operator) in self.operators.iter().enumerate() {
                    columns.column_mut(i).assign(&operator.forecast(label)?);
                }
                Ok(columns)
            }
        }
    }

    /// Online phase: one full-order snapshot per requested label.
    ///
    /// For every label the reduced forecasts of all training parameters are
    /// regressed over the parameter space, the regressor is evaluated at the
    /// requested parameter and the result is lifted through the POD basis.
    pub fn forecast_full(
        &self,
        request: &ForecastRequest,
    ) -> Result<Vec<Array1<C64>>, ParametricError> {
        if request.labels.is_empty() {
            return Err(ParametricError::EmptyLabels);
        }
        if request.parameter.dim() != self.parameter_dim() {
            return Err(ParametricError::ParameterDimMismatch {
                expected: self.parameter_dim(),
                found: request.parameter.dim(),
            });
        }
        let spec = request.regressor.unwrap_or(self.online_defaults);
        let points = self.parameter_matrix();
        let mut outputs = Vec::with_capacity(request.labels.len());
        for &label in &request.labels {
            let regressor = self.fit_label_regressor(&spec, &points, label)?;
            let reduced = regressor.evaluate(request.parameter.coords())?;
            let lifted = self.pod.lift(reduced.insert_axis(ndarray::Axis(1)).view())?;
            outputs.push(lifted.column(0).to_owned());
        }
        Ok(outputs)
    }

    /// Reduced coefficients of the online phase at one (parameter, label)
    /// pair: fit the per-label regressor and evaluate it, without lifting.
    pub fn forecast_reduced(
        &self,
        parameter: &ParameterPoint,
        label: i64,
        regressor: Option<RegressorSpec>,
    ) -> Result<Array1<C64>, ParametricError> {
        if parameter.dim() != self.parameter_dim() {
            return Err(ParametricError::ParameterDimMismatch {
                expected: self.parameter_dim(),
                found: parameter.dim(),
            });
        }
        let spec = regressor.unwrap_or(self.online_defaults);
        let points = self.parameter_matrix();
        let fitted = self.fit_label_regressor(&spec, &points, label)?;
        Ok(fitted.evaluate(parameter.coords())?)
    }

    pub(crate) fn parameter_matrix(&self) -> Array2<f64> {
        let q = self.parameter_dim();
        Array2::from_shape_fn((self.parameters.len(), q), |(i, k)| {
            self.parameters[i].coords()[k]
        })
    }

    /// Regressor over `(parameters -> reduced coefficients)` at one label.
    pub(crate) fn fit_label_regressor(
        &self,
        spec: &RegressorSpec,
        points: &Array2<f64>,
        label: i64,
    ) -> Result<crate::Regressor, ParametricError> {
        let columns = self.predict_reduced(label)?;
        let values = columns.t().to_owned();
        Ok(crate::Regressor::fit_spec(spec, points.view(), values.view())?)
    }

    pub(crate) fn from_parts(
        variant: Variant,
        pod: PodBasis,
        operators: Vec<DmdModel>,
        parameters: Vec<ParameterPoint>,
        time_axis: TimeAxis,
        dmd_config: DmdConfig,
        online_defaults: RegressorSpec,
        field_name: String,
    ) -> Self {
        Self {
            variant,
            pod,
            operators,
            parameters,
            time_axis,
            dmd_config,
            online_defaults,
            field_name,
        }
    }
}

/// Shared offline start: POD basis plus the per-parameter reduced blocks.
fn reduce(
    set: &ParametricSnapshotSet,
    pod_rank: usize,
) -> Result<(PodBasis, Vec<Array2<C64>>), ParametricError> {
    let global = assemble_global_matrix(set);
    let pod = PodBasis::fit(global.view(), pod_rank)?;
    let blocks = set
        .members()
        .iter()
        .map(|member| pod.project(member.values().view()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((pod, blocks))
}
