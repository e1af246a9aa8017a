use serde::Serialize;

use super::{label_cells, region, validate_eps, Evaluator};
use crate::error::Result;
use crate::geometry::{check_dim, Aabb, Grid, GridRegion, Label, TOL};
use crate::ideal::{IdealSpec, Verdict};
use crate::sequence::SequencePrefix;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterDiagnostics {
    pub uncertain_cells: usize,
    /// Verdict on `{n : x_n outside the grid}`. Cluster points outside the
    /// box are missed unless this is small.
    pub escape: Verdict,
    pub escape_count: usize,
}

/// The grid estimate `Γ̂` of the ideal cluster set.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterReport {
    #[serde(skip)]
    pub region: GridRegion,
    pub ideal: IdealSpec,
    pub horizon: usize,
    pub eps: Vec<f64>,
    #[serde(skip)]
    verdicts: Vec<Vec<Verdict>>,
    pub diagnostics: ClusterDiagnostics,
}

impl ClusterReport {
    /// Hit-set verdicts of a cell, one per radius.
    pub fn cell_verdicts(&self, idx: usize) -> &[Verdict] {
        &self.verdicts[idx]
    }

    pub fn in_centers(&self) -> Vec<Vec<f64>> {
        self.region.centers(Label::In)
    }

    /// Centers of in-cells and uncertain cells.
    pub fn possible_centers(&self) -> Vec<Vec<f64>> {
        let grid = self.region.grid();
        (0..grid.len())
            .filter(|&i| self.region.label(i).possibly_in())
            .map(|i| grid.center(i))
            .collect()
    }
}

fn classify(verdicts: &[Verdict]) -> Label {
    if verdicts.iter().all(|v| *v == Verdict::NotSmall) {
        Label::In
    } else if verdicts.contains(&Verdict::Small) {
        Label::Out
    } else {
        Label::Uncertain
    }
}

fn cell(ev: &Evaluator, eta: &[f64], eps: &[f64], buf: &mut Vec<f64>) -> (Label, Vec<Verdict>) {
    ev.distances(eta, buf);
    let verdicts: Vec<Verdict> = eps.iter().map(|e| ev.verdict_below(buf, e - TOL)).collect();
    (classify(&verdicts), verdicts)
}

/// Cell `η` is in when `{n : d(x_n, η) < ε}` is not small for every radius,
/// out when it is small for some radius, uncertain otherwise.
pub fn cluster_set(
    prefix: &SequencePrefix,
    ideal: &IdealSpec,
    bbox: &Aabb,
    h: f64,
    eps: &[f64],
) -> Result<ClusterReport> {
    validate_eps(eps, h)?;
    let grid = Grid::covering(bbox, h)?;
    let ev = Evaluator::new(prefix, ideal)?;
    let (labels, verdicts) = label_cells(&grid, |eta, buf| cell(&ev, eta, eps, buf));

    let extent = grid.extent();
    let tally = ev.ideal.tally(|n| !extent.contains(prefix.point(n)));
    let diagnostics = ClusterDiagnostics {
        uncertain_cells: labels.iter().filter(|l| **l == Label::Uncertain).count(),
        escape: ev.ideal.verdict(&tally).verdict,
        escape_count: tally.members(),
    };
    Ok(ClusterReport {
        region: region(grid, labels),
        ideal: ideal.clone(),
        horizon: prefix.horizon(),
        eps: eps.to_vec(),
        verdicts,
        diagnostics,
    })
}

/// Point query for any dimension up to 8.
pub fn cluster_membership(
    prefix: &SequencePrefix,
    ideal: &IdealSpec,
    eta: &[f64],
    eps: &[f64],
) -> Result<(Label, Vec<Verdict>)> {
    check_dim(eta.len())?;
    if eta.len() != prefix.dim() {
        return Err(crate::Error::DimensionMismatch {
            expected: prefix.dim(),
            found: eta.len(),
        });
    }
    validate_eps(eps, 0.0)?;
    let ev = Evaluator::new(prefix, ideal)?;
    Ok(cell(&ev, eta, eps, &mut Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{default_eps, sketch};
    use crate::ideal::IndexPattern;
    use crate::sequence::{generate, SequenceSpec};

    fn line(lo: f64, hi: f64) -> Aabb {
        Aabb::new(vec![lo], vec![hi]).unwrap()
    }

    #[test]
    fn alternating_clusters_at_plus_minus_one() {
        let h = 0.01;
        let x = generate(&SequenceSpec::Alternating, 10_000).unwrap();
        let c = cluster_set(&x, &IdealSpec::Fin, &line(-1.2, 1.2), h, &default_eps(h)).unwrap();
        let centers = c.in_centers();
        assert_eq!(centers.len(), 6, "{}", sketch(&c.region));
        assert!(centers.iter().all(|p| (p[0].abs() - 1.0).abs() < 2.0 * h));
        assert_eq!(c.diagnostics.escape, Verdict::Small);
    }

    #[test]
    fn spikes_vanish_under_density() {
        let h = 0.01;
        let x = generate(
            &SequenceSpec::PerturbedAlternating {
                spikes: IndexPattern::Squares,
            },
            100_000,
        )
        .unwrap();
        let c = cluster_set(&x, &IdealSpec::density(0.01), &line(-1.2, 1.2), h, &default_eps(h))
            .unwrap();
        // Oracle: direct hit counting of each cell at the smallest radius.
        let g = c.region.grid();
        for i in 0..g.len() {
            let eta = g.center(i)[0];
            let hits = x.points().filter(|p| (p[0] - eta).abs() < 2.0 * h).count();
            let expect = if hits > x.horizon() / 4 { Label::In } else { Label::Out };
            assert_eq!(c.region.label(i), expect, "cell {eta}");
        }
        assert_eq!(c.diagnostics.escape, Verdict::Small);
        assert!(c.diagnostics.escape_count > 0);
    }

    #[test]
    fn point_queries_in_higher_dimension() {
        let x = generate(
            &SequenceSpec::TwoPoint {
                on: vec![0.0; 4],
                off: vec![1.0; 4],
                partition: IndexPattern::Evens,
            },
            2_000,
        )
        .unwrap();
        let eps = [0.1, 0.05];
        let (l, _) = cluster_membership(&x, &IdealSpec::Fin, &[1.0; 4], &eps).unwrap();
        assert_eq!(l, Label::In);
        let (l, _) = cluster_membership(&x, &IdealSpec::Fin, &[0.5; 4], &eps).unwrap();
        assert_eq!(l, Label::Out);
    }
}
