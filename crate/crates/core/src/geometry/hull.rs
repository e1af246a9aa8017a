//! Convex hulls: intervals in `ℝ¹`, monotone chain in `ℝ²`, and
//! Frank–Wolfe distance bounds for membership queries in higher dimension.

use serde::Serialize;

use super::{dist, dist2, point_set_dim};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hull {
    Interval { lo: f64, hi: f64 },
    /// Counterclockwise vertices, collinear points dropped.
    Polygon { vertices: Vec<[f64; 2]> },
}

pub fn convex_hull(points: &[Vec<f64>]) -> Result<Hull> {
    let k = point_set_dim(points)?;
    match k {
        1 => {
            let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            Ok(Hull::Interval { lo, hi })
        }
        2 => Ok(Hull::Polygon {
            vertices: monotone_chain(points.iter().map(|p| [p[0], p[1]]).collect()),
        }),
        _ => Err(Error::HullDimension),
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn monotone_chain(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in [&pts[..], &pts.iter().rev().copied().collect::<Vec<_>>()[..]] {
        let base = hull.len();
        for &p in pass {
            while hull.len() >= base + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

impl Hull {
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        match self {
            Hull::Interval { lo, hi } if lo == hi => vec![vec![*lo]],
            Hull::Interval { lo, hi } => vec![vec![*lo], vec![*hi]],
            Hull::Polygon { vertices } => vertices.iter().map(|v| v.to_vec()).collect(),
        }
    }

    /// Euclidean distance from `p` to the hull.
    pub fn distance(&self, p: &[f64]) -> f64 {
        match self {
            Hull::Interval { lo, hi } => (lo - p[0]).max(p[0] - hi).max(0.0),
            Hull::Polygon { vertices } => {
                let q = [p[0], p[1]];
                match vertices.len() {
                    1 => dist(&vertices[0], &q),
                    2 => segment_distance(vertices[0], vertices[1], q),
                    n => {
                        let inside = (0..n).all(|i| cross(vertices[i], vertices[(i + 1) % n], q) >= 0.0);
                        if inside {
                            0.0
                        } else {
                            (0..n)
                                .map(|i| segment_distance(vertices[i], vertices[(i + 1) % n], q))
                                .fold(f64::INFINITY, f64::min)
                        }
                    }
                }
            }
        }
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.distance(p) <= tol
    }
}

fn segment_distance(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(&[a[0] + t * ab[0], a[1] + t * ab[1]], &p)
}

/// Lower and upper bounds on the distance from `p` to `co(points)` in any
/// dimension, from Frank–Wolfe iterations with the duality-gap certificate.
pub fn hull_distance_bounds(points: &[Vec<f64>], p: &[f64], iterations: usize) -> Result<(f64, f64)> {
    let k = point_set_dim(points)?;
    if p.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: p.len(),
        });
    }
    // minimize f(y) = |y − p|² / 2 over the hull
    let mut y = points
        .iter()
        .min_by(|a, b| dist2(a, p).total_cmp(&dist2(b, p)))
        .unwrap()
        .clone();
    let mut lower = 0.0f64;
    for _ in 0..iterations {
        let g: Vec<f64> = y.iter().zip(p).map(|(a, b)| a - b).collect();
        let dot = |v: &[f64]| v.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        let s = points.iter().min_by(|a, b| dot(a).total_cmp(&dot(b))).unwrap();
        // Every hull point z has (z − p)·g/|g| ≥ (s − p)·g/|g|.
        let gn = dot(&g).sqrt();
        if gn == 0.0 {
            return Ok((0.0, 0.0));
        }
        let sp: Vec<f64> = s.iter().zip(p).map(|(a, b)| a - b).collect();
        lower = lower.max(sp.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() / gn);
        let d: Vec<f64> = s.iter().zip(&y).map(|(a, b)| a - b).collect();
        let dd = d.iter().map(|x| x * x).sum::<f64>();
        let gap = -d.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        if dd == 0.0 || gap <= 1e-15 {
            break;
        }
        let t = (gap / dd).clamp(0.0, 1.0);
        for (yi, di) in y.iter_mut().zip(&d) {
            *yi += t * di;
        }
    }
    Ok((lower.max(0.0), dist(&y, p)))
}
