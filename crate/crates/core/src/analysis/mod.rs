//! Cluster sets `Γ̂`, rough limit sets `L̂` (directly and through `Γ̂`), the
//! core and the ball-family nonemptiness certificate.

mod cluster;
mod core;
pub(crate) mod limit;

use rayon::prelude::*;

pub use self::cluster::{cluster_membership, cluster_set, ClusterDiagnostics, ClusterReport};
pub use self::core::{
    core_membership, core_set, nonemptiness_certificate, nonemptiness_from_points, Certificate,
};
pub use self::limit::{
    limit_membership_direct, rough_limit_direct, rough_limit_via_clusters, LimitDiagnostics,
    LimitReport, Method,
};

use crate::error::{Error, Result};
use crate::family::RoughFamilySpec;
use crate::geometry::{dist, Aabb, Grid, GridRegion, Label, TOL};
use crate::ideal::{ideal_limsup, Ideal, IdealSpec, Verdict};
use crate::sequence::SequencePrefix;

/// Cluster radii `{8h, 4h, 2h}`.
pub fn default_eps(h: f64) -> Vec<f64> {
    vec![8.0 * h, 4.0 * h, 2.0 * h]
}

/// Enlargements `{4h, 2h, h}` used by the direct route for closed families.
pub fn default_enlargements(h: f64) -> Vec<f64> {
    vec![4.0 * h, 2.0 * h, h]
}

/// Positive, strictly decreasing, smallest radius at least `2h`.
pub fn validate_eps(eps: &[f64], h: f64) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::InvalidEpsSchedule("empty".into()));
    }
    if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::InvalidEpsSchedule("radii must be positive".into()));
    }
    if eps.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InvalidEpsSchedule("must be strictly decreasing".into()));
    }
    let min = *eps.last().unwrap();
    if min < 2.0 * h - TOL {
        return Err(Error::InvalidEpsSchedule(format!(
            "schedule finer than grid: smallest radius {min} below 2h = {}",
            2.0 * h
        )));
    }
    Ok(())
}

/// Sequence plus the ideal resolved at its horizon.
pub(crate) struct Evaluator<'a> {
    pub prefix: &'a SequencePrefix,
    pub ideal: Ideal,
}

impl<'a> Evaluator<'a> {
    pub fn new(prefix: &'a SequencePrefix, ideal: &IdealSpec) -> Result<Self> {
        Ok(Evaluator {
            prefix,
            ideal: ideal.at_horizon(prefix.horizon())?,
        })
    }

    pub fn distances(&self, eta: &[f64], buf: &mut Vec<f64>) {
        buf.clear();
        buf.extend(self.prefix.points().map(|x| dist(x, eta)));
    }

    /// Distances from `x_n − η` to the offset set of a general closed family.
    pub fn offset_distances(&self, family: &RoughFamilySpec, eta: &[f64], buf: &mut Vec<f64>) {
        buf.clear();
        let mut offset = vec![0.0; eta.len()];
        for x in self.prefix.points() {
            for (o, (a, b)) in offset.iter_mut().zip(x.iter().zip(eta)) {
                *o = a - b;
            }
            buf.push(family.offset_distance(&offset));
        }
    }

    pub fn verdict_below(&self, d: &[f64], threshold: f64) -> Verdict {
        self.ideal.verdict(&self.ideal.tally(|n| d[n] < threshold)).verdict
    }

    pub fn verdict_at_least(&self, d: &[f64], threshold: f64) -> Verdict {
        self.ideal.verdict(&self.ideal.tally(|n| d[n] >= threshold)).verdict
    }
}

/// Labels every cell of the grid in parallel with a reusable distance buffer.
pub(crate) fn label_cells<F>(grid: &Grid, per_cell: F) -> (Vec<Label>, Vec<Vec<Verdict>>)
where
    F: Fn(&[f64], &mut Vec<f64>) -> (Label, Vec<Verdict>) + Sync,
{
    let out: Vec<(Label, Vec<Verdict>)> = (0..grid.len())
        .into_par_iter()
        .map_init(Vec::new, |buf, i| per_cell(&grid.center(i), buf))
        .collect();
    out.into_iter().unzip()
}

pub(crate) fn region(grid: Grid, labels: Vec<Label>) -> GridRegion {
    GridRegion::new(grid, labels).expect("one label per cell")
}

/// Per-coordinate ideal liminf/limsup box: the bounded core the sequence
/// stays in outside a small index set.
pub fn ideal_box(prefix: &SequencePrefix, ideal: &IdealSpec) -> Result<Aabb> {
    let resolved = ideal.at_horizon(prefix.horizon())?;
    let mut lo = Vec::with_capacity(prefix.dim());
    let mut hi = Vec::with_capacity(prefix.dim());
    for d in 0..prefix.dim() {
        let up: Vec<f64> = prefix.points().map(|p| p[d]).collect();
        let down: Vec<f64> = up.iter().map(|x| -x).collect();
        hi.push(ideal_limsup(&resolved, &up)?.value);
        lo.push(-ideal_limsup(&resolved, &down)?.value);
    }
    for d in 0..lo.len() {
        if lo[d] > hi[d] {
            std::mem::swap(&mut lo[d], &mut hi[d]);
        }
    }
    Aabb::new(lo, hi)
}

/// Box for cluster scans: the ideal box padded by 10% and by the largest
/// cluster radius plus two cells.
pub fn auto_cluster_box(prefix: &SequencePrefix, ideal: &IdealSpec, h: f64, eps: &[f64]) -> Result<Aabb> {
    let core = ideal_box(prefix, ideal)?;
    let reach = eps.first().copied().unwrap_or(0.0) + 2.0 * h;
    Ok(pad(&core, reach))
}

/// Box for limit-set scans: every `η` with `Γ̂ ⊆ F_η` lies within the
/// family's reach of the ideal box.
pub fn auto_limit_box(
    prefix: &SequencePrefix,
    ideal: &IdealSpec,
    family: &RoughFamilySpec,
    h: f64,
) -> Result<Aabb> {
    let core = ideal_box(prefix, ideal)?;
    let first = family.reach(&core);
    let reach = first.max(family.reach(&core.inflate(first)));
    Ok(pad(&core.inflate(reach), 2.0 * h))
}

fn pad(b: &Aabb, min: f64) -> Aabb {
    Aabb {
        lo: (0..b.dim()).map(|d| b.lo[d] - (0.1 * b.side(d)).max(min)).collect(),
        hi: (0..b.dim()).map(|d| b.hi[d] + (0.1 * b.side(d)).max(min)).collect(),
    }
}

/// Labels in cell order, as a compact string (`#` in, `.` out, `?` uncertain) for 1-D debugging.
pub fn sketch(region: &GridRegion) -> String {
    region
        .labels()
        .iter()
        .map(|l| match l {
            Label::In => '#',
            Label::Out => '.',
            Label::Uncertain => '?',
        })
        .collect()
}
