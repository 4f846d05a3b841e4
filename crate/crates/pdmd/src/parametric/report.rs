//! Mean relative error of reconstructed snapshots against held-out truth.

use ndarray::Array2;

use super::{ParametricDmdModel, ParametricError};
use crate::pod::vector_norm;
use crate::regression::RegressorSpec;
use crate::store::ParametricSnapshotSet;

/// Per-label mean relative errors over a set of held-out parameters, with the
/// per-parameter breakdown.
///
/// For each requested label and each truth member, the model reconstructs the
/// snapshot and the relative l2 error `||x_hat - x|| / ||x||` enters the mean.
/// Members whose truth snapshot has zero norm are excluded from that label's
/// mean and counted instead.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    labels: Vec<i64>,
    times: Vec<f64>,
    e_i: Vec<f64>,
    excluded: Vec<usize>,
    /// members x labels; NaN marks excluded (zero-norm) entries.
    per_parameter: Array2<f64>,
    regressor: RegressorSpec,
    parameter_count: usize,
}

impl ErrorReport {
    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    /// Physical times of the labels on the model's axis.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Mean relative error per label.
    pub fn e_i(&self) -> &[f64] {
        &self.e_i
    }

    /// Zero-norm exclusion count per label.
    pub fn excluded(&self) -> &[usize] {
        &self.excluded
    }

    /// Relative error of member `i` at label column `j`; NaN when excluded.
    pub fn per_parameter(&self) -> &Array2<f64> {
        &self.per_parameter
    }

    pub fn regressor(&self) -> &RegressorSpec {
        &self.regressor
    }

    /// Size of the held-out parameter set.
    pub fn parameter_count(&self) -> usize {
        self.parameter_count
    }
}

impl ParametricDmdModel {
    /// Evaluates the mean relative error against `truth` at the given labels.
    ///
    /// The truth set plays the role of the held-out parameters: every member
    /// is forecast at every label with one regressor fit per label.
    pub fn compute_error_report(
        &self,
        truth: &ParametricSnapshotSet,
        labels: &[i64],
        regressor: Option<RegressorSpec>,
    ) -> Result<ErrorReport, ParametricError> {
        if labels.is_empty() {
            return Err(ParametricError::EmptyLabels);
        }
        if truth.parameter_dim() != self.parameter_dim() {
            return Err(ParametricError::ParameterDimMismatch {
                expected: self.parameter_dim(),
                found: truth.parameter_dim(),
            });
        }
        for &label in labels {
            if truth.time_axis().column_of(label).is_none() {
                return Err(ParametricError::LabelCoverage {
                    label,
                    origin: truth.time_axis().label_origin(),
                    last: truth.time_axis().last_label(),
                });
            }
        }

        let spec = regressor.unwrap_or(*self.online_defaults());
        let points = self.parameter_matrix();
        let q_count = truth.member_count();
        let mut per_parameter = Array2::<f64>::from_elem((q_count, labels.len()), f64::NAN);
        let mut e_i = Vec::with_capacity(labels.len());
        let mut excluded = Vec::with_capacity(labels.len());

        for (col, &label) in labels.iter().enumerate() {
            let fitted = self.fit_label_regressor(&spec, &points, label)?;
            let truth_col = truth.time_axis().column_of(label).expect("checked above");
            let mut sum = 0.0;
            let mut included = 0usize;
            for (row, member) in truth.members().iter().enumerate() {
                let reduced = fitted.evaluate(member.parameter().coords())?;
                let lifted = self.pod().lift(reduced.insert_axis(ndarray::Axis(1)).view())?;
                let reconstruction = lifted.column(0).to_owned();
                let truth_snapshot = member.values().column(truth_col).to_owned();
                let truth_norm = vector_norm(&truth_snapshot);
                if truth_norm > 0.0 {
                    let rel = vector_norm(&(&reconstruction - &truth_snapshot)) / truth_norm;
                    per_parameter[[row, col]] = rel;
                    sum += rel;
                    included += 1;
                }
            }
            e_i.push(if included > 0 { sum / included as f64 } else { 0.0 });
            excluded.push(q_count - included);
        }

        Ok(ErrorReport {
            times: labels.iter().map(|&l| self.time_axis().time_of(l)).collect(),
            labels: labels.to_vec(),
            e_i,
            excluded,
            per_parameter,
            regressor: spec,
            parameter_count: q_count,
        })
    }
}
