use serde::Serialize;

use super::{default_enlargements, label_cells, region, ClusterReport, Evaluator};
use crate::error::{Error, Result};
use crate::family::RoughFamilySpec;
use crate::geometry::{check_dim, covers, Aabb, Coverage, Grid, GridRegion, Label, TOL};
use crate::ideal::{IdealSpec, Verdict};
use crate::sequence::SequencePrefix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    ViaClusters,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitDiagnostics {
    pub uncertain_cells: usize,
    /// In-cells and uncertain cells of `Γ̂` (via-clusters only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster_cells: Option<(usize, usize)>,
}

/// The grid estimate `L̂` of the rough limit set.
#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    #[serde(skip)]
    pub region: GridRegion,
    pub method: Method,
    pub family: RoughFamilySpec,
    pub ideal: IdealSpec,
    pub horizon: usize,
    pub h: f64,
    /// Enlargements of `F_η` tested by the direct route; empty otherwise.
    pub enlargements: Vec<f64>,
    pub diagnostics: LimitDiagnostics,
}

fn classify(verdicts: &[Verdict]) -> Label {
    if verdicts.iter().all(|v| *v == Verdict::Small) {
        Label::In
    } else if verdicts.contains(&Verdict::NotSmall) {
        Label::Out
    } else {
        Label::Uncertain
    }
}

pub(crate) fn direct_cell(
    ev: &Evaluator,
    family: &RoughFamilySpec,
    eta: &[f64],
    enlargements: &[f64],
    buf: &mut Vec<f64>,
) -> (Label, Vec<Verdict>) {
    let verdicts: Vec<Verdict> = match family {
        RoughFamilySpec::ClosedBall { radius } => {
            ev.distances(eta, buf);
            let r = radius.eval(eta);
            enlargements
                .iter()
                .map(|e| ev.verdict_at_least(buf, r + e - TOL))
                .collect()
        }
        // The open ball is its own smallest open superset.
        RoughFamilySpec::OpenBall { radius } => {
            ev.distances(eta, buf);
            vec![ev.verdict_at_least(buf, radius.eval(eta) - TOL)]
        }
        RoughFamilySpec::GeneralClosed { .. } => {
            ev.offset_distances(family, eta, buf);
            enlargements
                .iter()
                .map(|e| ev.verdict_at_least(buf, e - TOL))
                .collect()
        }
    };
    (classify(&verdicts), verdicts)
}

/// `η` is in when the sequence leaves every tested enlargement of `F_η`
/// only on a small index set, out when it leaves one on a not-small set.
pub fn rough_limit_direct(
    prefix: &SequencePrefix,
    ideal: &IdealSpec,
    family: &RoughFamilySpec,
    bbox: &Aabb,
    h: f64,
) -> Result<LimitReport> {
    let grid = Grid::covering(bbox, h)?;
    check_family(family, prefix.dim(), &grid)?;
    let ev = Evaluator::new(prefix, ideal)?;
    let enlargements = if family.is_closed() {
        default_enlargements(h)
    } else {
        Vec::new()
    };
    let (labels, _) = label_cells(&grid, |eta, buf| direct_cell(&ev, family, eta, &enlargements, buf));
    Ok(LimitReport {
        diagnostics: LimitDiagnostics {
            uncertain_cells: labels.iter().filter(|l| **l == Label::Uncertain).count(),
            cluster_cells: None,
        },
        region: region(grid, labels),
        method: Method::Direct,
        family: family.clone(),
        ideal: ideal.clone(),
        horizon: prefix.horizon(),
        h,
        enlargements,
    })
}

/// Point query of the direct route for any dimension up to 8.
pub fn limit_membership_direct(
    prefix: &SequencePrefix,
    ideal: &IdealSpec,
    family: &RoughFamilySpec,
    eta: &[f64],
    enlargements: &[f64],
) -> Result<(Label, Vec<Verdict>)> {
    check_dim(eta.len())?;
    if eta.len() != prefix.dim() {
        return Err(Error::DimensionMismatch {
            expected: prefix.dim(),
            found: eta.len(),
        });
    }
    family.validate(eta.len(), None)?;
    if family.is_closed() && enlargements.is_empty() {
        return Err(Error::InvalidEpsSchedule("closed families need enlargements".into()));
    }
    let ev = Evaluator::new(prefix, ideal)?;
    Ok(direct_cell(&ev, family, eta, enlargements, &mut Vec::new()))
}

/// `η` is in when `Γ̂ ⊆ F_η` even counting uncertain cluster cells, out when
/// some certain cluster cell lies farther than the smallest cluster radius from `F_η`.
pub fn rough_limit_via_clusters(
    cluster: &ClusterReport,
    family: &RoughFamilySpec,
    bbox: &Aabb,
    h: f64,
) -> Result<LimitReport> {
    if !family.is_closed() {
        return Err(Error::RequiresClosedFamily);
    }
    let certain = cluster.in_centers();
    if certain.is_empty() {
        return Err(Error::EmptyClusterSet);
    }
    let possible = cluster.possible_centers();
    // An in-cell center lies within the smallest cluster radius of a cluster point.
    let blur = *cluster.eps.last().expect("validated schedule");
    let grid = Grid::covering(bbox, h)?;
    check_family(family, grid.dim(), &grid)?;
    let labels = GridRegion::from_fn(grid, |eta| {
        let wide = covers(&possible, family, eta, 0.0).expect("nonempty");
        let narrow = covers(&certain, family, eta, blur).expect("nonempty");
        if wide == Coverage::Yes {
            Label::In
        } else if narrow == Coverage::No {
            Label::Out
        } else {
            Label::Uncertain
        }
    });
    Ok(LimitReport {
        diagnostics: LimitDiagnostics {
            uncertain_cells: labels.count(Label::Uncertain),
            cluster_cells: Some((certain.len(), possible.len() - certain.len())),
        },
        region: labels,
        method: Method::ViaClusters,
        family: family.clone(),
        ideal: cluster.ideal.clone(),
        horizon: cluster.horizon,
        h,
        enlargements: Vec::new(),
    })
}

fn check_family(family: &RoughFamilySpec, dim: usize, grid: &Grid) -> Result<()> {
    if grid.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: grid.dim(),
        });
    }
    family.validate(dim, Some(&grid.extent()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{cluster_set, default_eps, sketch};
    use crate::family::{AffinePiece, RadiusFn};
    use crate::ideal::IndexPattern;
    use crate::sequence::{generate, SequenceSpec};

    fn line(lo: f64, hi: f64) -> Aabb {
        Aabb::new(vec![lo], vec![hi]).unwrap()
    }

    fn in_range(r: &GridRegion) -> (f64, f64) {
        let c = r.centers(Label::In);
        (c.first().unwrap()[0], c.last().unwrap()[0])
    }

    #[test]
    fn alternating_open_and_closed() {
        let h = 0.01;
        let x = generate(&SequenceSpec::Alternating, 10_000).unwrap();
        let bbox = line(-3.0, 3.0);
        let open = rough_limit_direct(&x, &IdealSpec::Fin, &RoughFamilySpec::open_ball(3.0), &bbox, h)
            .unwrap();
        let (lo, hi) = in_range(&open.region);
        assert!((lo + 1.99).abs() < 1e-9 && (hi - 1.99).abs() < 1e-9, "{lo} {hi}");
        let closed =
            rough_limit_direct(&x, &IdealSpec::Fin, &RoughFamilySpec::closed_ball(3.0), &bbox, h)
                .unwrap();
        let (lo, hi) = in_range(&closed.region);
        assert!((lo + 2.0).abs() < 1e-9 && (hi - 2.0).abs() < 1e-9, "{lo} {hi}");
    }

    #[test]
    fn via_clusters_rejects_open_families() {
        let h = 0.01;
        let x = generate(&SequenceSpec::Alternating, 1_000).unwrap();
        let c = cluster_set(&x, &IdealSpec::Fin, &line(-1.2, 1.2), h, &default_eps(h)).unwrap();
        let err = rough_limit_via_clusters(&c, &RoughFamilySpec::open_ball(3.0), &line(-3.0, 3.0), h)
            .unwrap_err();
        assert_eq!(err.to_string(), "characterization requires closed F_η");
    }

    #[test]
    fn via_clusters_singleton_for_zero_radius() {
        let h = 0.01;
        let x = generate(&SequenceSpec::Constant { value: vec![0.3] }, 1_000).unwrap();
        let c = cluster_set(&x, &IdealSpec::Fin, &line(0.0, 0.6), h, &default_eps(h)).unwrap();
        let l = rough_limit_via_clusters(&c, &RoughFamilySpec::closed_ball(0.0), &line(0.0, 0.6), h)
            .unwrap();
        // Γ̂ is blurred to three cells, so no cell is certainly in, and
        // everything away from 0.3 is out.
        assert_eq!(l.region.count(Label::In), 0);
        for i in l.region.cells(Label::Uncertain) {
            assert!((l.region.grid().center(i)[0] - 0.3).abs() < 1.5 * h);
        }
    }

    #[test]
    fn via_clusters_keeps_a_tight_limit_point() {
        // Γ = {−1, 1} and r = 1 leave only η = 0, which blurred Γ̂ cells
        // must not rule out.
        let h = 0.01;
        let x = generate(&SequenceSpec::Alternating, 4_000).unwrap();
        let c = cluster_set(&x, &IdealSpec::Fin, &line(-1.2, 1.2), h, &default_eps(h)).unwrap();
        let l = rough_limit_via_clusters(&c, &RoughFamilySpec::closed_ball(1.0), &line(-1.0, 1.0), h)
            .unwrap();
        assert!(l.region.label_at(&[0.0]).unwrap().possibly_in());
        assert_eq!(l.region.label_at(&[0.1]), Some(Label::Out));
    }

    #[test]
    fn prop12_witness_direct() {
        // x = r on A, r + h off A; F_η = [η − 1, η + 1]  ⇒  L = [r + h − 1, r + 1]
        let (r, step) = (1.0, 0.5);
        let x = generate(
            &SequenceSpec::TwoValue {
                base: r,
                step,
                partition: IndexPattern::Evens,
            },
            4_000,
        )
        .unwrap();
        let h = 0.01;
        let l = rough_limit_direct(&x, &IdealSpec::Fin, &RoughFamilySpec::closed_ball(1.0), &line(-1.0, 3.0), h)
            .unwrap();
        let (lo, hi) = in_range(&l.region);
        assert!((lo - 0.5).abs() < 1e-9 && (hi - 2.0).abs() < 1e-9, "{}", sketch(&l.region));
    }

    #[test]
    fn general_closed_interval_family() {
        // F_η = η + [−0.5, 1.5] on the alternating sequence: η ∈ [−0.5, −0.5]
        let h = 0.05;
        let x = generate(&SequenceSpec::Alternating, 4_000).unwrap();
        let f = RoughFamilySpec::GeneralClosed {
            cell: 1.0,
            offsets: vec![vec![0], vec![1]],
        };
        let l = rough_limit_direct(&x, &IdealSpec::Fin, &f, &line(-3.0, 3.0), h).unwrap();
        assert_eq!(l.region.centers(Label::In), vec![vec![-0.5]]);
    }

    #[test]
    fn concave_radius_direct() {
        let h = 0.01;
        let x = generate(&SequenceSpec::Alternating, 4_000).unwrap();
        let f = RoughFamilySpec::ClosedBall {
            radius: RadiusFn::ConcaveMinAffine {
                pieces: vec![
                    AffinePiece { slope: vec![0.0], offset: 1.0 },
                    AffinePiece { slope: vec![-0.5], offset: 2.0 },
                    AffinePiece { slope: vec![0.5], offset: 2.0 },
                ],
            },
        };
        // r = 1 near the origin, so L = {0}.
        let l = rough_limit_direct(&x, &IdealSpec::Fin, &f, &line(-3.0, 3.0), h).unwrap();
        let (lo, hi) = in_range(&l.region);
        assert!(lo.abs() <= h + 1e-9 && hi.abs() <= h + 1e-9);
    }
}
