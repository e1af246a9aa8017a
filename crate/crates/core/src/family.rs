//! Rough families `{F_η}`: closed or open balls with a radius function, or a
//! translated closed set built from grid cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub slope: Vec<f64>,
    pub offset: f64,
}

impl AffinePiece {
    fn eval(&self, eta: &[f64]) -> f64 {
        self.offset + self.slope.iter().zip(eta).map(|(a, x)| a * x).sum::<f64>()
    }
}

/// Radius `r(η)` of a ball family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusFn {
    Constant { value: f64 },
    /// Pointwise minimum of affine functions; concave by construction.
    ConcaveMinAffine { pieces: Vec<AffinePiece> },
    /// Samples on a regular grid, interpolated by the upper envelope: the
    /// value at `η` is the largest sample at a corner of any table cell
    /// containing `η`. Outside the table the nearest boundary samples apply.
    UpperSemicontinuousTable {
        origin: Vec<f64>,
        spacing: f64,
        shape: Vec<usize>,
        /// Row-major samples, last axis fastest.
        values: Vec<f64>,
    },
}

impl RadiusFn {
    pub fn eval(&self, eta: &[f64]) -> f64 {
        match self {
            RadiusFn::Constant { value } => *value,
            RadiusFn::ConcaveMinAffine { pieces } => pieces
                .iter()
                .map(|p| p.eval(eta))
                .fold(f64::INFINITY, f64::min),
            RadiusFn::UpperSemicontinuousTable {
                origin,
                spacing,
                shape,
                values,
            } => {
                let ranges: Vec<(usize, usize)> = (0..shape.len())
                    .map(|d| {
                        let t = (eta[d] - origin[d]) / spacing;
                        let last = (shape[d] - 1) as f64;
                        let lo = (t - 1e-9).floor().clamp(0.0, last) as usize;
                        let hi = (t + 1e-9).ceil().clamp(0.0, last) as usize;
                        (lo, hi)
                    })
                    .collect();
                let mut best = f64::NEG_INFINITY;
                let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
                loop {
                    let flat = idx.iter().zip(shape).fold(0, |acc, (i, s)| acc * s + i);
                    best = best.max(values[flat]);
                    // odometer over the corner ranges
                    let mut d = idx.len();
                    loop {
                        if d == 0 {
                            return best;
                        }
                        d -= 1;
                        if idx[d] < ranges[d].1 {
                            idx[d] += 1;
                            break;
                        }
                        idx[d] = ranges[d].0;
                    }
                }
            }
        }
    }

    pub fn constant(&self) -> Option<f64> {
        match self {
            RadiusFn::Constant { value } => Some(*value),
            _ => None,
        }
    }

    pub fn is_concave(&self) -> bool {
        matches!(self, RadiusFn::Constant { .. } | RadiusFn::ConcaveMinAffine { .. })
    }

    /// An upper bound for `r` over the box.
    pub fn upper_bound(&self, bbox: &Aabb) -> f64 {
        match self {
            RadiusFn::Constant { value } => *value,
            RadiusFn::ConcaveMinAffine { pieces } => {
                let corners = bbox.corners();
                pieces
                    .iter()
                    .map(|p| corners.iter().map(|c| p.eval(c)).fold(f64::MIN, f64::max))
                    .fold(f64::INFINITY, f64::min)
            }
            RadiusFn::UpperSemicontinuousTable { values, .. } => {
                values.iter().copied().fold(0.0, f64::max)
            }
        }
    }

    /// Checks shape and that `r ≥ 0` on the box (everywhere, when `bbox` is `None`).
    pub fn validate(&self, dim: usize, bbox: Option<&Aabb>) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidFamily(m));
        match self {
            RadiusFn::Constant { value } => {
                if !(value.is_finite() && *value >= 0.0) {
                    return bad(format!("radius {value} must be finite and nonnegative"));
                }
            }
            RadiusFn::ConcaveMinAffine { pieces } => {
                if pieces.is_empty() {
                    return bad("min-affine radius needs at least one piece".into());
                }
                if let Some(p) = pieces.iter().find(|p| p.slope.len() != dim) {
                    return bad(format!("affine slope {:?} is not {dim}-dimensional", p.slope));
                }
                if pieces
                    .iter()
                    .any(|p| !p.offset.is_finite() || p.slope.iter().any(|a| !a.is_finite()))
                {
                    return bad("non-finite affine coefficient".into());
                }
                // A concave function attains its minimum over a box at a corner.
                match bbox {
                    Some(b) => {
                        if let Some(c) = b.corners().iter().find(|c| self.eval(c) < 0.0) {
                            return bad(format!("radius negative at box corner {c:?}"));
                        }
                    }
                    None => {
                        if pieces.iter().any(|p| p.slope.iter().any(|&a| a != 0.0)) {
                            return bad("min-affine radius needs a box to check r ≥ 0".into());
                        }
                    }
                }
            }
            RadiusFn::UpperSemicontinuousTable {
                origin,
                spacing,
                shape,
                values,
            } => {
                if origin.len() != dim || shape.len() != dim {
                    return bad(format!("table must be {dim}-dimensional"));
                }
                if !(spacing.is_finite() && *spacing > 0.0) {
                    return bad(format!("table spacing {spacing} must be positive"));
                }
                if shape.contains(&0) || shape.iter().product::<usize>() != values.len() {
                    return bad("table shape does not match its values".into());
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return bad("table radii must be finite and nonnegative".into());
                }
            }
        }
        Ok(())
    }
}

/// The rough family `{F_η : η ∈ ℝ^k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoughFamilySpec {
    /// `F_η = {x : d(x, η) ≤ r(η)}`.
    ClosedBall { radius: RadiusFn },
    /// `F_η = {x : d(x, η) < r(η)}`.
    OpenBall { radius: RadiusFn },
    /// `F_η = η + S`, where `S` is the union of the closed cubes of side
    /// `cell` centred at `cell · o` for each offset `o`; the zero offset is
    /// required so that `η ∈ F_η`.
    GeneralClosed { cell: f64, offsets: Vec<Vec<i64>> },
}

impl RoughFamilySpec {
    pub fn closed_ball(r: f64) -> Self {
        RoughFamilySpec::ClosedBall {
            radius: RadiusFn::Constant { value: r },
        }
    }

    pub fn open_ball(r: f64) -> Self {
        RoughFamilySpec::OpenBall {
            radius: RadiusFn::Constant { value: r },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RoughFamilySpec::ClosedBall { .. } => "closed_ball",
            RoughFamilySpec::OpenBall { .. } => "open_ball",
            RoughFamilySpec::GeneralClosed { .. } => "general_closed",
        }
    }

    pub fn is_closed(&self) -> bool {
        !matches!(self, RoughFamilySpec::OpenBall { .. })
    }

    pub fn radius(&self) -> Option<&RadiusFn> {
        match self {
            RoughFamilySpec::ClosedBall { radius } | RoughFamilySpec::OpenBall { radius } => {
                Some(radius)
            }
            RoughFamilySpec::GeneralClosed { .. } => None,
        }
    }

    /// How far `F_η` can reach from `η` for `η` in the box.
    pub fn reach(&self, bbox: &Aabb) -> f64 {
        match self {
            RoughFamilySpec::ClosedBall { radius } | RoughFamilySpec::OpenBall { radius } => {
                radius.upper_bound(bbox)
            }
            RoughFamilySpec::GeneralClosed { cell, offsets } => {
                let half = 0.5 * cell;
                offsets
                    .iter()
                    .map(|o| {
                        o.iter()
                            .map(|&i| (i.abs() as f64 * cell + half).powi(2))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .fold(0.0, f64::max)
            }
        }
    }

    pub fn validate(&self, dim: usize, bbox: Option<&Aabb>) -> Result<()> {
        match self {
            RoughFamilySpec::ClosedBall { radius } | RoughFamilySpec::OpenBall { radius } => {
                radius.validate(dim, bbox)
            }
            RoughFamilySpec::GeneralClosed { cell, offsets } => {
                if !(cell.is_finite() && *cell > 0.0) {
                    return Err(Error::InvalidFamily(format!("cell {cell} must be positive")));
                }
                if offsets.iter().any(|o| o.len() != dim) {
                    return Err(Error::InvalidFamily(format!(
                        "offsets must be {dim}-dimensional"
                    )));
                }
                if !offsets.iter().any(|o| o.iter().all(|&i| i == 0)) {
                    return Err(Error::InvalidFamily(
                        "general closed set must contain η itself (zero offset)".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Distance from `offset = x − η` to the offset set `F_η − η` (zero inside).
    pub fn offset_distance(&self, offset: &[f64]) -> f64 {
        match self {
            RoughFamilySpec::ClosedBall { .. } | RoughFamilySpec::OpenBall { .. } => {
                panic!("offset_distance is defined for general closed families only")
            }
            RoughFamilySpec::GeneralClosed { cell, offsets } => {
                let half = 0.5 * cell;
                offsets
                    .iter()
                    .map(|o| {
                        o.iter()
                            .zip(offset)
                            .map(|(&i, x)| {
                                let gap = (x - i as f64 * cell).abs() - half;
                                if gap > 0.0 {
                                    gap * gap
                                } else {
                                    0.0
                                }
                            })
                            .sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min)
                    .sqrt()
            }
        }
    }

    /// Membership of `x` in `F_η` up to [`TOL`].
    pub fn contains(&self, eta: &[f64], x: &[f64]) -> bool {
        match self {
            RoughFamilySpec::ClosedBall { radius } => {
                crate::geometry::dist(eta, x) <= radius.eval(eta) + TOL
            }
            RoughFamilySpec::OpenBall { radius } => {
                crate::geometry::dist(eta, x) < radius.eval(eta) - TOL
            }
            RoughFamilySpec::GeneralClosed { .. } => {
                let offset: Vec<f64> = x.iter().zip(eta).map(|(a, b)| a - b).collect();
                self.offset_distance(&offset) <= TOL
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_affine_is_pointwise_min() {
        // r(η) = min(1, 2 − |η|/2)
        let r = RadiusFn::ConcaveMinAffine {
            pieces: vec![
                AffinePiece { slope: vec![0.0], offset: 1.0 },
                AffinePiece { slope: vec![-0.5], offset: 2.0 },
                AffinePiece { slope: vec![0.5], offset: 2.0 },
            ],
        };
        assert_eq!(r.eval(&[0.0]), 1.0);
        assert_eq!(r.eval(&[3.0]), 0.5);
        assert_eq!(r.eval(&[-3.0]), 0.5);
        let bbox = Aabb::new(vec![-4.0], vec![4.0]).unwrap();
        assert!(r.validate(1, Some(&bbox)).is_ok());
        let wide = Aabb::new(vec![-5.0], vec![5.0]).unwrap();
        assert!(r.validate(1, Some(&wide)).is_err());
        assert_eq!(r.upper_bound(&bbox), 1.0);
    }

    #[test]
    fn table_upper_envelope() {
        // samples at -1, 0, 1 with values 3, 0, 3
        let r = RadiusFn::UpperSemicontinuousTable {
            origin: vec![-1.0],
            spacing: 1.0,
            shape: vec![3],
            values: vec![3.0, 0.0, 3.0],
        };
        assert_eq!(r.eval(&[0.0]), 3.0); // touches both neighbouring cells
        assert_eq!(r.eval(&[0.5]), 3.0);
        assert_eq!(r.eval(&[-7.0]), 3.0);

        let r = RadiusFn::UpperSemicontinuousTable {
            origin: vec![-2.0],
            spacing: 1.0,
            shape: vec![5],
            values: vec![3.0, 3.0, 0.0, 0.0, 3.0],
        };
        assert_eq!(r.eval(&[0.5]), 0.0);
        assert_eq!(r.eval(&[0.0]), 3.0);
    }

    #[test]
    fn table_2d() {
        let r = RadiusFn::UpperSemicontinuousTable {
            origin: vec![0.0, 0.0],
            spacing: 1.0,
            shape: vec![2, 2],
            values: vec![0.0, 1.0, 2.0, 0.5],
        };
        assert!(r.validate(2, None).is_ok());
        assert_eq!(r.eval(&[0.5, 0.5]), 2.0);
        assert_eq!(r.eval(&[0.0, 0.0]), 2.0);
    }

    #[test]
    fn validation_failures() {
        assert!(RoughFamilySpec::closed_ball(-1.0).validate(1, None).is_err());
        let no_center = RoughFamilySpec::GeneralClosed {
            cell: 1.0,
            offsets: vec![vec![1]],
        };
        assert!(no_center.validate(1, None).is_err());
    }

    #[test]
    fn general_closed_distance() {
        let f = RoughFamilySpec::GeneralClosed {
            cell: 1.0,
            offsets: vec![vec![0, 0], vec![2, 0]],
        };
        assert_eq!(f.offset_distance(&[0.3, 0.2]), 0.0);
        assert!((f.offset_distance(&[1.0, 0.0]) - 0.5).abs() < 1e-12);
        assert!(f.contains(&[1.0, 1.0], &[3.2, 1.4]));
    }
}
