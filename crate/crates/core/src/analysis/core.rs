use serde::Serialize;

use super::ClusterReport;
use crate::error::{Error, Result};
use crate::geometry::hull::hull_distance_bounds;
use crate::geometry::{convex_hull, minimal_enclosing_ball, point_set_dim, GridRegion, Label, TOL};

/// Convex hull of `Γ̂` rasterised onto the cluster grid: in when inside the
/// hull of the in-cells, out when outside the hull of in and uncertain cells.
pub fn core_set(cluster: &ClusterReport) -> Result<GridRegion> {
    let certain = cluster.in_centers();
    if certain.is_empty() {
        return Err(Error::EmptyClusterSet);
    }
    let narrow = convex_hull(&certain)?;
    let wide = convex_hull(&cluster.possible_centers())?;
    Ok(GridRegion::from_fn(cluster.region.grid().clone(), |p| {
        if narrow.contains(p, TOL) {
            Label::In
        } else if !wide.contains(p, TOL) {
            Label::Out
        } else {
            Label::Uncertain
        }
    }))
}

/// Is `p` in the convex hull of `points`? Exact for `k ≤ 2`; from
/// Frank–Wolfe distance bounds above that, uncertain when they straddle [`TOL`].
pub fn core_membership(points: &[Vec<f64>], p: &[f64]) -> Result<Label> {
    let k = point_set_dim(points)?;
    if k <= 2 {
        return Ok(if convex_hull(points)?.contains(p, TOL) {
            Label::In
        } else {
            Label::Out
        });
    }
    let (lower, upper) = hull_distance_bounds(points, p, 2_000)?;
    Ok(if upper <= TOL {
        Label::In
    } else if lower > TOL {
        Label::Out
    } else {
        Label::Uncertain
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `Γ̂ ⊆ B_r(witness)`.
    Nonempty { witness: Vec<f64>, radius: f64 },
    /// The Chebyshev radius exceeds `r` by `gap`.
    Empty { gap: f64, radius: f64 },
    /// Within the resolution of the estimate.
    Boundary { gap: f64, radius: f64 },
}

impl Certificate {
    pub fn is_empty(&self) -> bool {
        matches!(self, Certificate::Empty { .. })
    }
}

/// For constant-radius closed balls, `L ≠ ∅` iff the minimal enclosing ball
/// of the cluster points has radius at most `r`. Gaps up to `slack` are
/// reported as boundary cases.
pub fn nonemptiness_from_points(points: &[Vec<f64>], r: f64, slack: f64) -> Result<Certificate> {
    check_radius(r)?;
    let ball = minimal_enclosing_ball(points)?;
    Ok(if ball.radius <= r + TOL {
        Certificate::Nonempty {
            witness: ball.center,
            radius: ball.radius,
        }
    } else if ball.radius - r > slack + TOL {
        Certificate::Empty {
            gap: ball.radius - r,
            radius: ball.radius,
        }
    } else {
        Certificate::Boundary {
            gap: ball.radius - r,
            radius: ball.radius,
        }
    })
}

/// Certificate from a grid estimate: nonempty needs the enclosing ball of
/// in and uncertain cells within `r`; empty needs the ball of the in-cells,
/// shrunk by the smallest cluster radius, to exceed `r`.
pub fn nonemptiness_certificate(cluster: &ClusterReport, r: f64) -> Result<Certificate> {
    check_radius(r)?;
    let certain = cluster.in_centers();
    if certain.is_empty() {
        return Err(Error::EmptyClusterSet);
    }
    let wide = minimal_enclosing_ball(&cluster.possible_centers())?;
    if wide.radius <= r + TOL {
        return Ok(Certificate::Nonempty {
            witness: wide.center,
            radius: wide.radius,
        });
    }
    let blur = cluster.eps.last().copied().unwrap_or(0.0);
    nonemptiness_from_points(&certain, r, blur)
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidFamily(format!("radius {r} must be finite and nonnegative")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{cluster_set, default_eps};
    use crate::geometry::Aabb;
    use crate::ideal::{IdealSpec, IndexPattern};
    use crate::sequence::{generate, SequenceSpec};

    #[test]
    fn certificates_on_points() {
        let pair = vec![vec![-1.0], vec![1.0]];
        assert_eq!(
            nonemptiness_from_points(&pair, 1.0, 0.0).unwrap(),
            Certificate::Nonempty {
                witness: vec![0.0],
                radius: 1.0
            }
        );
        match nonemptiness_from_points(&pair, 0.5, 0.0).unwrap() {
            Certificate::Empty { gap, .. } => assert!((gap - 0.5).abs() < 1e-12),
            c => panic!("{c:?}"),
        }
        let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        match nonemptiness_from_points(&tri, 0.71, 0.0).unwrap() {
            Certificate::Nonempty { witness, .. } => {
                assert!((witness[0] - 0.5).abs() < 1e-12 && (witness[1] - 0.5).abs() < 1e-12)
            }
            c => panic!("{c:?}"),
        }
    }

    #[test]
    fn core_of_two_cluster_points_is_the_segment() {
        let h = 0.01;
        let x = generate(&SequenceSpec::Alternating, 4_000).unwrap();
        let bbox = Aabb::new(vec![-1.2], vec![1.2]).unwrap();
        let c = cluster_set(&x, &IdealSpec::Fin, &bbox, h, &default_eps(h)).unwrap();
        let core = core_set(&c).unwrap();
        let inside = core.centers(Label::In);
        assert!((inside.first().unwrap()[0] + 1.01).abs() < 1e-9);
        assert!((inside.last().unwrap()[0] - 1.01).abs() < 1e-9);
        assert_eq!(core.count(Label::Uncertain), 0);
    }

    #[test]
    fn core_of_three_points_is_a_triangle() {
        let h = 0.05;
        let x = generate(
            &SequenceSpec::TwoPoint {
                on: vec![0.0, 0.0],
                off: vec![1.0, 0.0],
                partition: IndexPattern::Evens,
            },
            3_000,
        )
        .unwrap();
        // add a third cluster point through a csv-free construction
        let mut pts: Vec<Vec<f64>> = x.points().map(|p| p.to_vec()).collect();
        for (n, p) in pts.iter_mut().enumerate() {
            if n % 3 == 0 {
                *p = vec![0.0, 1.0];
            }
        }
        let x = crate::sequence::SequencePrefix::from_points(&pts, x.provenance().clone()).unwrap();
        let bbox = Aabb::new(vec![-0.5, -0.5], vec![1.5, 1.5]).unwrap();
        let c = cluster_set(&x, &IdealSpec::Fin, &bbox, h, &default_eps(h)).unwrap();
        let core = core_set(&c).unwrap();
        assert_eq!(core.label_at(&[0.25, 0.25]), Some(Label::In));
        assert_eq!(core.label_at(&[0.75, 0.75]), Some(Label::Out));
    }

    #[test]
    fn high_dimensional_core_queries() {
        let simplex: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        assert_eq!(core_membership(&simplex, &[1.0, 1.0, 1.0, 1.0]).unwrap(), Label::Out);
        assert_eq!(core_membership(&simplex, &[1.0, 0.0, 0.0, 0.0]).unwrap(), Label::In);
    }
}
