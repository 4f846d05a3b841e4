//! Parameter-space regressors mapping points of the parameter set to reduced
//! coefficients, used by the online phase to explore untested parameters.
//!
//! Five interchangeable kinds: simplex-based linear interpolation (piecewise
//! linear in 1-D, Delaunay barycentric in 2-D), nearest neighbor, natural
//! cubic spline (1-D only), thin-plate radial basis functions and Gaussian
//! process regression. All kinds act componentwise on the real and imaginary
//! parts of the target values, so complex fitting is linear in the targets.
//! Linear and cubic kinds refuse to extrapolate; the others are defined
//! everywhere.

mod delaunay;
mod gpr;
mod rbf;
mod spline;

use ndarray::{Array1, Array2, ArrayView2};
use ndarray_linalg::Lapack;
use num_traits::{Float, NumCast, One, Zero};
use thiserror::Error;

use crate::Field;

#[derive(Debug, Error)]
pub enum RegressionError {
    #[error("{kind} regression needs at least {needed} points, got {got}")]
    TooFewPoints { kind: RegressorKind, needed: usize, got: usize },
    #[error("training points {first} and {second} coincide")]
    DuplicatePoints { first: usize, second: usize },
    #[error("degenerate training geometry: {0}")]
    DegenerateGeometry(String),
    #[error("query dimension {found} does not match the training dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{rows} value rows for {points} training points")]
    ValueRowsMismatch { points: usize, rows: usize },
    #[error("{kind} regression does not support parameter dimension {dim}")]
    UnsupportedDimension { kind: RegressorKind, dim: usize },
    #[error("query {point:?} outside the training region ({region}); no extrapolation")]
    Extrapolation { point: Vec<f64>, region: String },
    #[error("invalid hyperparameter: {0}")]
    BadHyperparameter(String),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("linear algebra backend failed: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

/// The interchangeable regressor families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressorKind {
    /// Piecewise linear: segments in 1-D, Delaunay simplices in 2-D.
    Linear,
    /// Value of the nearest training point (ties: lowest member index).
    Nearest,
    /// Natural cubic spline; 1-D parameter spaces only.
    Cubic1d,
    /// Thin-plate radial basis functions with an affine tail.
    Rbf,
    /// Gaussian process posterior mean, squared-exponential kernel.
    Gpr,
}

impl RegressorKind {
    pub const ALL: [RegressorKind; 5] = [
        RegressorKind::Linear,
        RegressorKind::Nearest,
        RegressorKind::Cubic1d,
        RegressorKind::Rbf,
        RegressorKind::Gpr,
    ];

    /// Minimum number of training points, before geometry checks.
    fn min_points(self, dim: usize) -> usize {
        match self {
            RegressorKind::Nearest | RegressorKind::Rbf | RegressorKind::Gpr => 1,
            RegressorKind::Linear => {
                if dim <= 1 {
                    2
                } else {
                    3
                }
            }
            RegressorKind::Cubic1d => 3,
        }
    }
}

impl std::fmt::Display for RegressorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            RegressorKind::Linear => "linear",
            RegressorKind::Nearest => "nearest",
            RegressorKind::Cubic1d => "cubic",
            RegressorKind::Rbf => "rbf",
            RegressorKind::Gpr => "gpr",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for RegressorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(RegressorKind::Linear),
            "nearest" => Ok(RegressorKind::Nearest),
            "cubic" | "cubic1d" | "cubic-1d" => Ok(RegressorKind::Cubic1d),
            "rbf" => Ok(RegressorKind::Rbf),
            "gpr" => Ok(RegressorKind::Gpr),
            other => Err(format!(
                "unknown regressor '{other}' (expected linear|nearest|cubic|rbf|gpr)"
            )),
        }
    }
}

/// Kind plus hyperparameters, as carried by model files and CLI flags.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RegressorSpec {
    pub kind: RegressorKind,
    /// Squared-exponential lengthscale; `None` = median pairwise distance.
    pub gpr_lengthscale: Option<f64>,
    /// Noise standard deviation; `None` = 1e-8 times the signal deviation.
    pub gpr_noise: Option<f64>,
}

impl RegressorSpec {
    pub fn new(kind: RegressorKind) -> Self {
        Self { kind, gpr_lengthscale: None, gpr_noise: None }
    }
}

impl Default for RegressorSpec {
    fn default() -> Self {
        Self::new(RegressorKind::Linear)
    }
}

/// A fitted map from the parameter space to the (complex) target space.
#[derive(Debug, Clone)]
pub struct Regressor<F: Field> {
    points: Array2<F::Real>,
    values: Array2<F>,
    state: State<F>,
}

#[derive(Debug, Clone)]
enum State<F: Field> {
    Nearest,
    Linear1d { order: Vec<usize> },
    Linear2d { triangulation: delaunay::Triangulation },
    Cubic1d { order: Vec<usize>, knots: Vec<F::Real>, second: Array2<F> },
    Rbf { thin_plate: rbf::ThinPlate<F> },
    Gpr { state: gpr::GprState<F> },
}

impl<F: Field> Regressor<F>
where
    F::Real: Lapack,
{
    /// Fits `kind` to `points` (p x q) and `values` (p x n).
    pub fn fit(
        kind: RegressorKind,
        points: ArrayView2<F::Real>,
        values: ArrayView2<F>,
    ) -> Result<Self, RegressionError> {
        Self::fit_spec(&RegressorSpec::new(kind), points, values)
    }

    pub fn fit_spec(
        spec: &RegressorSpec,
        points: ArrayView2<F::Real>,
        values: ArrayView2<F>,
    ) -> Result<Self, RegressionError> {
        let (p, q) = points.dim();
        let kind = spec.kind;
        if values.nrows() != p {
            return Err(RegressionError::ValueRowsMismatch { points: p, rows: values.nrows() });
        }
        if p < kind.min_points(q) {
            return Err(RegressionError::TooFewPoints {
                kind,
                needed: kind.min_points(q),
                got: p,
            });
        }
        for i in 0..p {
            for j in i + 1..p {
                if points.row(i) == points.row(j) {
                    return Err(RegressionError::DuplicatePoints { first: i, second: j });
                }
            }
        }

        let points = points.to_owned();
        let values = values.to_owned();
        let state = match kind {
            RegressorKind::Nearest => State::Nearest,
            RegressorKind::Linear => match q {
                1 => State::Linear1d { order: sorted_order(points.column(0)) },
                2 => {
                    let coords = to_f64_pairs(points.view());
                    State::Linear2d { triangulation: delaunay::triangulate(&coords)? }
                }
                dim => return Err(RegressionError::UnsupportedDimension { kind, dim }),
            },
            RegressorKind::Cubic1d => {
                if q != 1 {
                    return Err(RegressionError::UnsupportedDimension { kind, dim: q });
                }
                let order = sorted_order(points.column(0));
                let knots: Vec<F::Real> = order.iter().map(|&i| points[[i, 0]]).collect();
                let sorted_values = reorder_rows(values.view(), &order);
                let second = spline::second_derivatives::<F>(&knots, sorted_values.view());
                State::Cubic1d { order, knots, second }
            }
            RegressorKind::Rbf => {
                State::Rbf { thin_plate: rbf::fit(points.view(), values.view())? }
            }
            RegressorKind::Gpr => State::Gpr {
                state: gpr::fit(points.view(), values.view(), spec.gpr_lengthscale, spec.gpr_noise)?,
            },
        };
        Ok(Self { points, values, state })
    }

    /// Number of training points p.
    pub fn point_count(&self) -> usize {
        self.points.nrows()
    }

    /// Parameter dimension q.
    pub fn parameter_dim(&self) -> usize {
        self.points.ncols()
    }

    /// Evaluates the fitted map. Deterministic; linear and cubic kinds return
    /// an extrapolation error outside the training region.
    pub fn evaluate(&self, point: &[F::Real]) -> Result<Array1<F>, RegressionError> {
        if point.len() != self.parameter_dim() {
            return Err(RegressionError::DimensionMismatch {
                expected: self.parameter_dim(),
                found: point.len(),
            });
        }
        match &self.state {
            State::Nearest => {
                let mut best = 0;
                let mut best_dist = F::Real::infinity();
                for (i, row) in self.points.rows().into_iter().enumerate() {
                    let d2 = row
                        .iter()
                        .zip(point)
                        .fold(F::Real::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
                    if d2 < best_dist {
                        best_dist = d2;
                        best = i;
                    }
                }
                Ok(self.values.row(best).to_owned())
            }
            State::Linear1d { order } => {
                let x = point[0];
                let first = self.points[[order[0], 0]];
                let last = self.points[[*order.last().unwrap(), 0]];
                if x < first || x > last {
                    return Err(self.extrapolation_error(point, interval_summary(first, last)));
                }
                // rightmost segment whose left knot is <= x
                let seg = order
                    .windows(2)
                    .position(|w| x <= self.points[[w[1], 0]])
                    .unwrap_or(order.len() - 2);
                let (i0, i1) = (order[seg], order[seg + 1]);
                let (x0, x1) = (self.points[[i0, 0]], self.points[[i1, 0]]);
                let t = (x - x0) / (x1 - x0);
                let left = self.values.row(i0).mapv(|v| v * F::from_real(F::Real::one() - t));
                let right = self.values.row(i1).mapv(|v| v * F::from_real(t));
                Ok(left + right)
            }
            State::Linear2d { triangulation } => {
                let q = [
                    NumCast::from(point[0]).unwrap(),
                    NumCast::from(point[1]).unwrap(),
                ];
                let Some((tri, bary)) = triangulation.locate(q) else {
                    return Err(self.extrapolation_error(point, triangulation.hull_summary()));
                };
                let ids = triangulation.triangles()[tri];
                let mut out = Array1::<F>::zeros(self.values.ncols());
                for (vertex, weight) in ids.iter().zip(bary) {
                    let w = F::from_real(crate::field::real(weight));
                    out = out + self.values.row(*vertex).mapv(|v| v * w);
                }
                Ok(out)
            }
            State::Cubic1d { order, knots, second } => {
                let x = point[0];
                if x < knots[0] || x > *knots.last().unwrap() {
                    return Err(self.extrapolation_error(
                        point,
                        interval_summary(knots[0], *knots.last().unwrap()),
                    ));
                }
                let sorted_values = reorder_rows(self.values.view(), order);
                Ok(spline::evaluate(knots, sorted_values.view(), second, x))
            }
            State::Rbf { thin_plate } => Ok(thin_plate.evaluate(self.points.view(), point)),
            State::Gpr { state } => Ok(state.evaluate(self.points.view(), point)),
        }
    }

    /// Posterior variance per target component; `None` for non-GPR kinds.
    pub fn gpr_variance(&self, point: &[F::Real]) -> Option<Array1<F::Real>> {
        match &self.state {
            State::Gpr { state } => Some(state.variance(self.points.view(), point)),
            _ => None,
        }
    }

    fn extrapolation_error(&self, point: &[F::Real], region: String) -> RegressionError {
        RegressionError::Extrapolation {
            point: point.iter().map(|&c| NumCast::from(c).unwrap()).collect(),
            region,
        }
    }
}

fn sorted_order<R: Float>(column: ndarray::ArrayView1<R>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..column.len()).collect();
    order.sort_by(|&a, &b| column[a].partial_cmp(&column[b]).unwrap());
    order
}

fn reorder_rows<F: Field>(values: ArrayView2<F>, order: &[usize]) -> Array2<F> {
    let mut out = Array2::<F>::zeros((order.len(), values.ncols()));
    for (row, &src) in order.iter().enumerate() {
        out.row_mut(row).assign(&values.row(src));
    }
    out
}

fn to_f64_pairs<R: Float>(points: ArrayView2<R>) -> Vec<[f64; 2]> {
    points
        .rows()
        .into_iter()
        .map(|row| [NumCast::from(row[0]).unwrap(), NumCast::from(row[1]).unwrap()])
        .collect()
}

fn interval_summary<R: std::fmt::Display>(lo: R, hi: R) -> String {
    format!("abscissa range [{lo}, {hi}]")
}
