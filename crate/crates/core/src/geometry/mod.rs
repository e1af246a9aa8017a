//! Geometric kernels: minimal enclosing balls, convex hulls, grid regions and
//! the cover test `Γ̂ ⊆ F_η`.

pub mod grid;
pub mod hull;
pub mod meb;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::RoughFamilySpec;

pub use grid::{excess, Grid, GridRegion, Label};
pub use hull::{convex_hull, Hull};
pub use meb::minimal_enclosing_ball;

/// Absolute tolerance for point predicates.
pub const TOL: f64 = 1e-9;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 8;

#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

pub(crate) fn check_dim(k: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&k) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(k))
    }
}

/// Validates a nonempty point set of uniform dimension and returns that dimension.
pub(crate) fn point_set_dim(points: &[Vec<f64>]) -> Result<usize> {
    let k = points.first().ok_or(Error::EmptyPointSet)?.len();
    check_dim(k)?;
    if let Some(p) = points.iter().find(|p| p.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: p.len(),
        });
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidGrid("non-finite coordinate".into()));
    }
    Ok(k)
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Aabb {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        check_dim(lo.len())?;
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
            return Err(Error::InvalidGrid(format!("empty or non-finite box {lo:?}..{hi:?}")));
        }
        Ok(Aabb { lo, hi })
    }

    /// Smallest box containing every point.
    pub fn around<'a>(points: impl IntoIterator<Item = &'a [f64]>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut lo = first.to_vec();
        let mut hi = first.to_vec();
        for p in it {
            for d in 0..lo.len() {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        Some(Aabb { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn side(&self, d: usize) -> f64 {
        self.hi[d] - self.lo[d]
    }

    /// Grows every side by `margin` on both ends.
    pub fn inflate(&self, margin: f64) -> Self {
        Aabb {
            lo: self.lo.iter().map(|x| x - margin).collect(),
            hi: self.hi.iter().map(|x| x + margin).collect(),
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (a, b))| *a <= *x && *x <= *b)
    }

    /// All `2^k` corners.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let k = self.dim();
        (0..1usize << k)
            .map(|mask| {
                (0..k)
                    .map(|d| if mask >> d & 1 == 1 { self.hi[d] } else { self.lo[d] })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallKind {
    Open,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
    pub kind: BallKind,
}

impl Ball {
    pub fn closed(center: Vec<f64>, radius: f64) -> Self {
        Ball {
            center,
            radius,
            kind: BallKind::Closed,
        }
    }

    /// Closed balls of radius zero are the singleton `{center}`; open ones are empty.
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        let d = dist(&self.center, p);
        match self.kind {
            BallKind::Closed => d <= self.radius + tol,
            BallKind::Open => d < self.radius - tol,
        }
    }
}

/// Outcome of testing `Γ̂ ⊆ F_η`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Coverage {
    Yes,
    No,
    /// Within [`TOL`] of the boundary of `F_η`.
    Boundary,
}

/// Does `F_η` contain every center?
///
/// `No` needs a center farther than `slack` from `F_η`, so centers that only
/// locate a point up to `slack` are not taken as certain escapes. Ball
/// families compare `max_γ d(η, γ)` against `r(η)` with a [`TOL`] band;
/// general closed families test each center against the offset set.
pub fn covers(centers: &[Vec<f64>], family: &RoughFamilySpec, eta: &[f64], slack: f64) -> Result<Coverage> {
    if centers.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    Ok(match family {
        RoughFamilySpec::ClosedBall { radius } | RoughFamilySpec::OpenBall { radius } => {
            let r = radius.eval(eta);
            let far = centers
                .iter()
                .map(|g| dist(g, eta))
                .fold(0.0, f64::max);
            let closed = family.is_closed();
            if (closed && far <= r - TOL) || (!closed && far < r - TOL) {
                Coverage::Yes
            } else if (closed && far > r + slack + TOL) || (!closed && far >= r + slack + TOL) {
                Coverage::No
            } else {
                Coverage::Boundary
            }
        }
        RoughFamilySpec::GeneralClosed { .. } => {
            let mut offset = vec![0.0; eta.len()];
            let far = centers
                .iter()
                .map(|g| {
                    for (o, (x, e)) in offset.iter_mut().zip(g.iter().zip(eta)) {
                        *o = x - e;
                    }
                    family.offset_distance(&offset)
                })
                .fold(0.0, f64::max);
            if far <= TOL {
                Coverage::Yes
            } else if far > slack + TOL {
                Coverage::No
            } else {
                Coverage::Boundary
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn covers_examples() {
        let gamma = pts(&[-1.0, 1.0]);
        let r3 = RoughFamilySpec::closed_ball(3.0);
        assert_eq!(covers(&gamma, &r3, &[0.0], 0.0).unwrap(), Coverage::Yes);
        assert_eq!(covers(&gamma, &r3, &[2.5], 0.0).unwrap(), Coverage::No);
        assert_eq!(covers(&gamma, &r3, &[2.0], 0.0).unwrap(), Coverage::Boundary);
        assert_eq!(covers(&gamma, &r3, &[2.05], 0.1).unwrap(), Coverage::Boundary);
        assert_eq!(covers(&gamma, &r3, &[2.15], 0.1).unwrap(), Coverage::No);

        // η ∈ F_η for every family.
        for family in [
            RoughFamilySpec::closed_ball(0.0),
            RoughFamilySpec::open_ball(0.25),
            RoughFamilySpec::GeneralClosed {
                cell: 0.5,
                offsets: vec![vec![0]],
            },
        ] {
            assert_ne!(covers(&pts(&[0.7]), &family, &[0.7], 0.0).unwrap(), Coverage::No);
        }
    }

    #[test]
    fn open_ball_excludes_its_sphere() {
        let family = RoughFamilySpec::open_ball(3.0);
        assert_eq!(covers(&pts(&[-1.0, 1.0]), &family, &[1.9], 0.0).unwrap(), Coverage::Yes);
        assert_eq!(covers(&pts(&[-1.0, 1.0]), &family, &[2.0], 0.0).unwrap(), Coverage::Boundary);
        assert_eq!(covers(&pts(&[-1.0, 1.0]), &family, &[2.1], 0.0).unwrap(), Coverage::No);
    }

    #[test]
    fn general_closed_offsets() {
        // F_η = η + [-0.5, 1.5]
        let family = RoughFamilySpec::GeneralClosed {
            cell: 1.0,
            offsets: vec![vec![0], vec![1]],
        };
        assert_eq!(covers(&pts(&[1.4]), &family, &[0.0], 0.0).unwrap(), Coverage::Yes);
        assert_eq!(covers(&pts(&[-0.6]), &family, &[0.0], 0.0).unwrap(), Coverage::No);
    }

    #[test]
    fn aabb_corners_and_inflate() {
        let b = Aabb::new(vec![0.0, 1.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(b.corners().len(), 4);
        let c = b.inflate(0.5);
        assert_eq!(c.lo, vec![-0.5, 0.5]);
        assert!(Aabb::new(vec![1.0], vec![0.0]).is_err());
    }
}
