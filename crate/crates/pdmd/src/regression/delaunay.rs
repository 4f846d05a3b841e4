//! Incremental Bowyer-Watson Delaunay triangulation with barycentric lookup.
//!
//! Predicates run in plain `f64` with a scale-relative tolerance; exact
//! circumcircle ties are broken deterministically by lexicographic order of
//! the involved points, so degenerate (cocircular) inputs still triangulate
//! reproducibly.

use super::RegressionError;

#[derive(Debug, Clone)]
pub(crate) struct Triangulation {
    points: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
}

/// Triangulates distinct 2-D points. Fails when every point is collinear.
pub(crate) fn triangulate(input: &[[f64; 2]]) -> Result<Triangulation, RegressionError> {
    assert!(input.len() >= 3, "caller checks the minimum point count");

    let (lo, hi) = bounding_box(input);
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1.0);
    let scale = span.max(lo[0].abs().max(lo[1].abs()).max(hi[0].abs().max(hi[1].abs())));
    let center = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];

    // working set: input points plus a super-triangle comfortably around them
    let mut points = input.to_vec();
    let s = points.len();
    points.push([center[0] - 64.0 * span, center[1] - 32.0 * span]);
    points.push([center[0] + 64.0 * span, center[1] - 32.0 * span]);
    points.push([center[0], center[1] + 64.0 * span]);
    let mut triangles: Vec<[usize; 3]> = vec![oriented(&points, [s, s + 1, s + 2])];

    for i in 0..s {
        let p = points[i];
        let bad: Vec<usize> = (0..triangles.len())
            .filter(|&t| in_circumcircle(&points, triangles[t], p, scale))
            .collect();
        // cavity boundary: edges used by exactly one bad triangle
        let mut boundary: Vec<(usize, usize)> = Vec::new();
        for &t in &bad {
            let [a, b, c] = triangles[t];
            for edge in [(a, b), (b, c), (c, a)] {
                let key = (edge.0.min(edge.1), edge.0.max(edge.1));
                if let Some(pos) = boundary.iter().position(|&e| e == key) {
                    boundary.swap_remove(pos);
                } else {
                    boundary.push(key);
                }
            }
        }
        for &t in bad.iter().rev() {
            triangles.swap_remove(t);
        }
        for (a, b) in boundary {
            if orient2d(points[a], points[b], p).abs() > 1e-12 * scale * scale {
                triangles.push(oriented(&points, [a, b, i]));
            }
        }
    }

    triangles.retain(|t| t.iter().all(|&v| v < s));
    if triangles.is_empty() {
        return Err(RegressionError::DegenerateGeometry(
            "points do not span a 2-D region (collinear input)".into(),
        ));
    }
    Ok(Triangulation { points: input.to_vec(), triangles })
}

impl Triangulation {
    pub(crate) fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Finds the simplex containing `q` and its barycentric coordinates
    /// `(l0, l1, l2)` with respect to the triangle's vertices. `None` when
    /// `q` lies outside the triangulated hull.
    pub(crate) fn locate(&self, q: [f64; 2]) -> Option<(usize, [f64; 3])> {
        const EDGE_TOL: f64 = 1e-12;
        for (t, tri) in self.triangles.iter().enumerate() {
            if let Some(bary) = self.barycentric(*tri, q) {
                if bary.iter().all(|&l| l >= -EDGE_TOL) {
                    return Some((t, bary));
                }
            }
        }
        None
    }

    fn barycentric(&self, tri: [usize; 3], q: [f64; 2]) -> Option<[f64; 3]> {
        let [a, b, c] = [self.points[tri[0]], self.points[tri[1]], self.points[tri[2]]];
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        if det == 0.0 {
            return None;
        }
        let l1 = ((q[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (q[1] - a[1])) / det;
        let l2 = ((b[0] - a[0]) * (q[1] - a[1]) - (q[0] - a[0]) * (b[1] - a[1])) / det;
        Some([1.0 - l1 - l2, l1, l2])
    }

    /// Short description of the covered region, used by extrapolation errors.
    pub(crate) fn hull_summary(&self) -> String {
        let (lo, hi) = bounding_box(&self.points);
        format!(
            "convex hull of {} points within [{}, {}] x [{}, {}]",
            self.points.len(),
            lo[0],
            hi[0],
            lo[1],
            hi[1]
        )
    }
}

fn bounding_box(points: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// Twice the signed area of (a, b, c); positive for counter-clockwise.
fn orient2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn oriented(points: &[[f64; 2]], tri: [usize; 3]) -> [usize; 3] {
    if orient2d(points[tri[0]], points[tri[1]], points[tri[2]]) < 0.0 {
        [tri[0], tri[2], tri[1]]
    } else {
        tri
    }
}

/// Whether `p` lies strictly inside the circumcircle of the (CCW) triangle.
/// Near-zero determinants count as cocircular ties and are resolved by
/// lexicographic comparison against the triangle's smallest vertex.
fn in_circumcircle(points: &[[f64; 2]], tri: [usize; 3], p: [f64; 2], scale: f64) -> bool {
    let [a, b, c] = [points[tri[0]], points[tri[1]], points[tri[2]]];
    let (ax, ay) = (a[0] - p[0], a[1] - p[1]);
    let (bx, by) = (b[0] - p[0], b[1] - p[1]);
    let (cx, cy) = (c[0] - p[0], c[1] - p[1]);
    let det = (ax * ax + ay * ay) * (bx * cy - cx * by)
        - (bx * bx + by * by) * (ax * cy - cx * ay)
        + (cx * cx + cy * cy) * (ax * by - bx * ay);
    let tol = 1e-12 * scale * scale * scale * scale;
    if det.abs() <= tol {
        let smallest = tri
            .iter()
            .map(|&v| points[v])
            .min_by(|u, v| u.partial_cmp(v).unwrap())
            .unwrap();
        return p < smallest;
    }
    det > 0.0
}
