//! Snapshot data model and the on-disk archive format.
//!
//! A [`ParametricSnapshotSet`] holds one complex `m x N` matrix per training
//! parameter, all sharing a uniform [`TimeAxis`]. Sets are immutable after
//! construction and safe to share across threads. [`archive`] defines the
//! directory layout (`manifest.json` plus one binary matrix file per member)
//! with bit-exact round-tripping of all floating-point payloads.

mod archive;

pub use archive::{read_archive, write_archive, ArchiveError};
pub(crate) use archive::{read_matrix as archive_read_matrix, write_matrix as archive_write_matrix};

use ndarray::Array2;
use thiserror::Error;

use crate::C64;

/// Uniform time discretization carrying both integer labels and physical time.
///
/// Algorithms operate on integer labels; label `k` maps to physical time
/// `t0 + (k - label_origin) * dt`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimeAxis {
    t0: f64,
    dt: f64,
    count: usize,
    label_origin: i64,
}

impl TimeAxis {
    pub fn new(t0: f64, dt: f64, count: usize, label_origin: i64) -> Result<Self, StoreError> {
        if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() {
            return Err(StoreError::BadTimeAxis {
                reason: format!("dt must be a positive finite number, got {dt}"),
            });
        }
        if count < 2 {
            return Err(StoreError::BadTimeAxis {
                reason: format!("at least 2 time instants required, got {count}"),
            });
        }
        Ok(Self { t0, dt, count, label_origin })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of time instants N.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Label of the first instant.
    pub fn label_origin(&self) -> i64 {
        self.label_origin
    }

    /// Label of the last instant.
    pub fn last_label(&self) -> i64 {
        self.label_origin + self.count as i64 - 1
    }

    /// Physical time of an arbitrary label (also outside the sampled window).
    pub fn time_of(&self, label: i64) -> f64 {
        self.t0 + (label - self.label_origin) as f64 * self.dt
    }

    /// Column index of a label, if it falls inside the sampled window.
    pub fn column_of(&self, label: i64) -> Option<usize> {
        let offset = label - self.label_origin;
        (0..self.count as i64).contains(&offset).then_some(offset as usize)
    }

    /// All sampled labels in column order.
    pub fn labels(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.count as i64).map(|k| self.label_origin + k)
    }
}

/// A point in the parameter set, with `q >= 1` real coordinates.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct ParameterPoint {
    coords: Vec<f64>,
}

impl ParameterPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self, StoreError> {
        if coords.is_empty() {
            return Err(StoreError::BadParameter {
                reason: "parameter point needs at least one coordinate".into(),
            });
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(StoreError::BadParameter {
                reason: format!("non-finite coordinate {c}"),
            });
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

impl From<f64> for ParameterPoint {
    fn from(value: f64) -> Self {
        Self { coords: vec![value] }
    }
}

impl std::fmt::Display for ParameterPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Snapshots of one realization of the system: column `j` holds the state at
/// time label `label_origin + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    parameter: ParameterPoint,
    values: Array2<C64>,
}

impl SnapshotMatrix {
    pub fn new(parameter: ParameterPoint, values: Array2<C64>) -> Self {
        Self { parameter, values }
    }

    pub fn parameter(&self) -> &ParameterPoint {
        &self.parameter
    }

    /// Spatial dimension m.
    pub fn space_dim(&self) -> usize {
        self.values.nrows()
    }

    /// Number of time instants N.
    pub fn time_count(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<C64> {
        &self.values
    }
}

/// The training tensor: `p` snapshot matrices over a shared time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricSnapshotSet {
    time_axis: TimeAxis,
    field_name: String,
    members: Vec<SnapshotMatrix>,
}

impl ParametricSnapshotSet {
    /// Builds a set, rejecting any invariant violation.
    pub fn new(
        time_axis: TimeAxis,
        field_name: impl Into<String>,
        members: Vec<SnapshotMatrix>,
    ) -> Result<Self, StoreError> {
        let set = Self::new_unchecked(time_axis, field_name, members);
        let violations = set.validate();
        if violations.is_empty() {
            Ok(set)
        } else {
            Err(StoreError::InvalidSet { violations })
        }
    }

    /// Builds a set without checking invariants. Intended for constructing
    /// deliberately broken sets when exercising [`Self::validate`].
    pub fn new_unchecked(
        time_axis: TimeAxis,
        field_name: impl Into<String>,
        members: Vec<SnapshotMatrix>,
    ) -> Self {
        Self { time_axis, field_name: field_name.into(), members }
    }

    /// Checks every type invariant, returning one entry per violation.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        if self.members.is_empty() {
            violations.push(Violation::EmptyMembers);
            return violations;
        }
        let m = self.members[0].space_dim();
        let q = self.members[0].parameter().dim();
        for (i, member) in self.members.iter().enumerate() {
            if member.space_dim() != m {
                violations.push(Violation::SpaceDimMismatch {
                    member: i,
                    expected: m,
                    found: member.space_dim(),
                });
            }
            if member.time_count() != self.time_axis.count() {
                violations.push(Violation::TimeCountMismatch {
                    member: i,
                    expected: self.time_axis.count(),
                    found: member.time_count(),
                });
            }
            if member.parameter().dim() != q {
                violations.push(Violation::ParameterDimMismatch {
                    member: i,
                    expected: q,
                    found: member.parameter().dim(),
                });
            }
            if let Some(((row, col), _)) = member
                .values()
                .indexed_iter()
                .find(|(_, v)| !v.re.is_finite() || !v.im.is_finite())
            {
                violations.push(Violation::NonFiniteValue { member: i, row, col });
            }
        }
        for i in 0..self.members.len() {
            for j in i + 1..self.members.len() {
                if self.members[i].parameter() == self.members[j].parameter() {
                    violations.push(Violation::DuplicateParameter { first: i, second: j });
                }
            }
        }
        violations
    }

    pub fn time_axis(&self) -> &TimeAxis {
        &self.time_axis
    }

    pub fn field_name(&self) -> &str {
        &self.field_name
    }

    /// Number of training parameters p.
    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    /// Spatial dimension m shared by all members.
    pub fn space_dim(&self) -> usize {
        self.members[0].space_dim()
    }

    /// Parameter dimension q shared by all members.
    pub fn parameter_dim(&self) -> usize {
        self.members[0].parameter().dim()
    }

    pub fn members(&self) -> &[SnapshotMatrix] {
        &self.members
    }

    pub fn parameters(&self) -> Vec<ParameterPoint> {
        self.members.iter().map(|m| m.parameter().clone()).collect()
    }

    /// Restriction to a contiguous label window `from..=to`.
    pub fn restrict_labels(&self, from: i64, to: i64) -> Result<Self, StoreError> {
        let (Some(first), Some(last)) =
            (self.time_axis.column_of(from), self.time_axis.column_of(to))
        else {
            return Err(StoreError::LabelOutOfRange {
                from,
                to,
                origin: self.time_axis.label_origin(),
                last: self.time_axis.last_label(),
            });
        };
        if last < first + 1 {
            return Err(StoreError::BadTimeAxis {
                reason: format!("window {from}..={to} holds fewer than 2 instants"),
            });
        }
        let axis = TimeAxis::new(
            self.time_axis.time_of(from),
            self.time_axis.dt(),
            last - first + 1,
            from,
        )?;
        let members = self
            .members
            .iter()
            .map(|member| {
                SnapshotMatrix::new(
                    member.parameter().clone(),
                    member.values().slice(ndarray::s![.., first..=last]).to_owned(),
                )
            })
            .collect();
        Self::new(axis, self.field_name.clone(), members)
    }

    /// Sub-set holding the given members, in the given order.
    pub fn select_members(&self, indices: &[usize]) -> Result<Self, StoreError> {
        let members = indices
            .iter()
            .map(|&i| {
                self.members
                    .get(i)
                    .cloned()
                    .ok_or(StoreError::MemberOutOfRange { index: i, count: self.members.len() })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(self.time_axis, self.field_name.clone(), members)
    }
}

/// One invariant violation found by [`ParametricSnapshotSet::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyMembers,
    SpaceDimMismatch { member: usize, expected: usize, found: usize },
    TimeCountMismatch { member: usize, expected: usize, found: usize },
    ParameterDimMismatch { member: usize, expected: usize, found: usize },
    DuplicateParameter { first: usize, second: usize },
    NonFiniteValue { member: usize, row: usize, col: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::EmptyMembers => write!(f, "set has no members"),
            Self::SpaceDimMismatch { member, expected, found } => write!(
                f,
                "member {member}: spatial dimension {found} differs from {expected}"
            ),
            Self::TimeCountMismatch { member, expected, found } => write!(
                f,
                "member {member}: {found} time instants, time axis has {expected}"
            ),
            Self::ParameterDimMismatch { member, expected, found } => write!(
                f,
                "member {member}: parameter dimension {found} differs from {expected}"
            ),
            Self::DuplicateParameter { first, second } => {
                write!(f, "members {first} and {second} share the same parameter point")
            }
            Self::NonFiniteValue { member, row, col } => {
                write!(f, "member {member}: non-finite value at row {row}, column {col}")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("invalid time axis: {reason}")]
    BadTimeAxis { reason: String },
    #[error("invalid parameter point: {reason}")]
    BadParameter { reason: String },
    #[error("set violates invariants: {}", format_violations(violations))]
    InvalidSet { violations: Vec<Violation> },
    #[error("labels {from}..={to} outside the sampled window {origin}..={last}")]
    LabelOutOfRange { from: i64, to: i64, origin: i64, last: i64 },
    #[error("member index {index} out of range for {count} members")]
    MemberOutOfRange { index: usize, count: usize },
}

fn format_violations(violations: &[Violation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
