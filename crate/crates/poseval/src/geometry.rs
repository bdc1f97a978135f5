//! Numeric kernels: optimal rigid superposition, centroids, distances, and
//! radius-bounded neighbor search.

use crate::error::{Error, Result};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub type Point = [f64; 3];

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn norm(a: Point) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Proper rigid motion: `x -> R x + t` with `det(R) = +1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: [0.0; 3],
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        let r = &self.rotation;
        [
            r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2] + self.translation[0],
            r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2] + self.translation[1],
            r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2] + self.translation[2],
        ]
    }

    pub fn apply_all(&self, pts: &[Point]) -> Vec<Point> {
        pts.iter().map(|&p| self.apply(p)).collect()
    }
}

/// Atom pair within a query radius; always `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborPair {
    pub i: usize,
    pub j: usize,
    pub dist: f64,
}

/// Arithmetic mean of a nonempty point set.
pub fn centroid(points: &[Point]) -> Result<Point> {
    if points.is_empty() {
        return Err(Error::InvalidInput("centroid of empty point set".into()));
    }
    let n = points.len() as f64;
    let mut c = [0.0; 3];
    for p in points {
        c[0] += p[0];
        c[1] += p[1];
        c[2] += p[2];
    }
    Ok([c[0] / n, c[1] / n, c[2] / n])
}

/// Optimal superposition of `mobile` onto `target` (Kabsch).
///
/// Returns the transform minimizing the RMSD of `R*mobile + t` against
/// `target`, together with that minimal RMSD. The reflection branch of the
/// SVD is corrected so the rotation is proper.
pub fn kabsch(mobile: &[Point], target: &[Point]) -> Result<(RigidTransform, f64)> {
    if mobile.len() != target.len() {
        return Err(Error::InvalidInput(format!(
            "point set sizes differ: {} vs {}",
            mobile.len(),
            target.len()
        )));
    }
    if mobile.len() < 3 {
        return Err(Error::InvalidInput(
            "need at least 3 points for superposition".into(),
        ));
    }
    let cm = centroid(mobile)?;
    let ct = centroid(target)?;

    // Cross-covariance of centered coordinates.
    let mut h = Matrix3::<f64>::zeros();
    for (p, q) in mobile.iter().zip(target) {
        let a = Vector3::new(p[0] - cm[0], p[1] - cm[1], p[2] - cm[2]);
        let b = Vector3::new(q[0] - ct[0], q[1] - ct[1], q[2] - ct[2]);
        h += b * a.transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Degenerate("svd failed".into()))?;
    let vt = svd
        .v_t
        .ok_or_else(|| Error::Degenerate("svd failed".into()))?;
    if svd.singular_values[1] < 1e-12 {
        return Err(Error::Degenerate(
            "point set is rank-deficient (collinear)".into(),
        ));
    }
    let d = (u * vt).determinant();
    let sign = if d < 0.0 { -1.0 } else { 1.0 };
    let s = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, sign));
    let r = u * s * vt;

    let rc = r * Vector3::new(cm[0], cm[1], cm[2]);
    let t = [ct[0] - rc[0], ct[1] - rc[1], ct[2] - rc[2]];
    let transform = RigidTransform {
        rotation: [
            [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
            [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
            [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
        ],
        translation: t,
    };
    let mut ss = 0.0;
    for (p, q) in mobile.iter().zip(target) {
        let d = sub(transform.apply(*p), *q);
        ss += dot(d, d);
    }
    let rmsd = (ss / mobile.len() as f64).sqrt();
    Ok((transform, rmsd))
}

/// All unordered pairs with distance <= radius, via a cell list.
///
/// Output is deterministic: pairs sorted ascending by (i, j).
pub fn neighbor_pairs(points: &[Point], radius: f64) -> Vec<NeighborPair> {
    assert!(radius > 0.0, "radius must be positive");
    let n = points.len();
    if n < 2 {
        return Vec::new();
    }
    let cell = radius;
    let key = |p: &Point| -> (i64, i64, i64) {
        (
            (p[0] / cell).floor() as i64,
            (p[1] / cell).floor() as i64,
            (p[2] / cell).floor() as i64,
        )
    };
    let mut cells: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (idx, p) in points.iter().enumerate() {
        cells.entry(key(p)).or_default().push(idx);
    }
    let mut pairs = Vec::new();
    for (idx, p) in points.iter().enumerate() {
        let (cx, cy, cz) = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bucket) = cells.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &jdx in bucket {
                            if jdx <= idx {
                                continue;
                            }
                            let d = dist(*p, points[jdx]);
                            if d <= radius {
                                pairs.push(NeighborPair {
                                    i: idx,
                                    j: jdx,
                                    dist: d,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    pairs.sort_by(|a, b| (a.i, a.j).cmp(&(b.i, b.j)));
    pairs
}
