use serde_json::json;

use super::{CheckReport, Status, Timer, Witness, MAX_WITNESSES};
use crate::analysis::limit::direct_cell;
use crate::analysis::{
    auto_cluster_box, auto_limit_box, cluster_set, core_set, default_enlargements, default_eps,
    nonemptiness_certificate, rough_limit_direct, rough_limit_via_clusters, Certificate,
    ClusterReport, Evaluator, LimitReport,
};
use crate::error::{Error, Result};
use crate::family::{RadiusFn, RoughFamilySpec};
use crate::geometry::{convex_hull, covers, dist, Aabb, Coverage, Grid, GridRegion, Label, TOL};
use crate::ideal::{ideal_limsup, IdealSpec, IndexPattern, Verdict};
use crate::sequence::{generate, SequencePrefix, SequenceSpec};

/// Probes per boundary cell in the closedness check, at `h/2, h/4, …`.
const PROBES: i32 = 8;

fn auto_cluster(prefix: &SequencePrefix, ideal: &IdealSpec, h: f64) -> Result<ClusterReport> {
    let eps = default_eps(h);
    let bbox = auto_cluster_box(prefix, ideal, h, &eps)?;
    cluster_set(prefix, ideal, &bbox, h, &eps)
}

fn disagreement_witnesses(region: &GridRegion, cells: &[usize], detail: &str) -> Vec<Witness> {
    Witness::cells(region, cells, detail, MAX_WITNESSES)
}

/// Direct and via-clusters limit regions must agree away from their bands.
pub fn check_characterization(
    prefix: &SequencePrefix,
    ideal: &IdealSpec,
    r: f64,
    bbox: &Aabb,
    h: f64,
) -> Result<CheckReport> {
    let timer = Timer::start();
    let family = RoughFamilySpec::closed_ball(r);
    let cluster = auto_cluster(prefix, ideal, h)?;
    let direct = rough_limit_direct(prefix, ideal, &family, bbox, h)?;
    let via = rough_limit_via_clusters(&cluster, &family, bbox, h)?;
    let cmp = direct.region.compare(&via.region, 2.0 * h)?;
    let status = if cmp.agrees() { Status::Pass } else { Status::Fail };
    Ok(timer.report(
        "characterization",
        status,
        disagreement_witnesses(&direct.region, &cmp.disagreements, "direct and via-clusters labels differ"),
        json!({
            "r": r,
            "h": h,
            "horizon": prefix.horizon(),
            "ideal": ideal,
            "box": bbox,
            "compared_cells": cmp.compared,
            "excluded_cells": cmp.excluded,
            "direct_in": direct.region.count(Label::In),
            "via_in": via.region.count(Label::In),
        }),
        Vec::new(),
    ))
}

/// Looks for out-cells that are limits of in-points: probes between each
/// out-cell and an adjacent in-cell at distances `h/2^j`, evaluated at the
/// matching resolution.
pub fn check_closedness(prefix: &SequencePrefix, limit: &LimitReport) -> Result<CheckReport> {
    let timer = Timer::start();
    let region = &limit.region;
    let grid = region.grid();
    let h = grid.h();
    let ev = Evaluator::new(prefix, &limit.ideal)?;
    let mut buf = Vec::new();
    let mut label_at = |eta: &[f64], s: f64| {
        direct_cell(&ev, &limit.family, eta, &default_enlargements(s), &mut buf).0
    };
    let mut violations = Vec::new();
    let mut boundary = 0;
    for i in region.cells(Label::Out) {
        let Some(j) = grid
            .face_neighbours(i)
            .into_iter()
            .find(|&j| region.label(j) == Label::In)
        else {
            continue;
        };
        boundary += 1;
        let (a, b) = (grid.center(i), grid.center(j));
        let approached = (1..=PROBES).all(|p| {
            let t = 0.5f64.powi(p);
            let eta: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + t * (y - x)).collect();
            label_at(&eta, t * h) == Label::In
        });
        if approached && label_at(&a, h * 0.5f64.powi(PROBES)) == Label::Out {
            violations.push(i);
        }
    }
    let mut notes = Vec::new();
    if matches!(limit.family.radius(), Some(RadiusFn::UpperSemicontinuousTable { .. })) {
        notes.push("upper semicontinuous tabulated radius".to_string());
    }
    let status = if violations.is_empty() {
        Status::Pass
    } else if limit.family.is_closed() {
        Status::Fail
    } else {
        notes.push("open F_η: closedness is not claimed".into());
        Status::HypothesisViolated
    };
    Ok(timer.report(
        "closedness",
        status,
        disagreement_witnesses(region, &violations, "out-cell approached by in-points"),
        json!({
            "family": limit.family,
            "h": h,
            "probes": PROBES,
            "boundary_cells": boundary,
        }),
        notes,
    ))
}

/// Grid convexity: for every pair of in-cells, a midpoint cell is in or uncertain.
pub fn check_convexity(limit: &LimitReport) -> Result<CheckReport> {
    let timer = Timer::start();
    let region = &limit.region;
    let grid = region.grid();
    let cells: Vec<Vec<usize>> = region.cells(Label::In).map(|i| grid.coords(i)).collect();
    let mut violations = Vec::new();
    'pairs: for (n, a) in cells.iter().enumerate() {
        for b in &cells[n + 1..] {
            let lo: Vec<usize> = a.iter().zip(b).map(|(x, y)| (x + y) / 2).collect();
            let hi: Vec<usize> = a.iter().zip(b).map(|(x, y)| (x + y).div_ceil(2)).collect();
            let candidates = match grid.dim() {
                1 => vec![vec![lo[0]], vec![hi[0]]],
                _ => vec![
                    vec![lo[0], lo[1]],
                    vec![lo[0], hi[1]],
                    vec![hi[0], lo[1]],
                    vec![hi[0], hi[1]],
                ],
            };
            if !candidates
                .iter()
                .any(|c| region.label(grid.index(c)).possibly_in())
            {
                violations.push(grid.index(&lo));
                if violations.len() >= MAX_WITNESSES {
                    break 'pairs;
                }
            }
        }
    }
    let concave = limit.family.radius().is_some_and(RadiusFn::is_concave);
    let mut notes = Vec::new();
    let status = if violations.is_empty() {
        Status::Pass
    } else if concave {
        Status::Fail
    } else {
        notes.push("radius is not concave: convexity is not claimed".into());
        Status::HypothesisViolated
    };
    Ok(timer.report(
        "convexity",
        status,
        disagreement_witnesses(region, &violations, "midpoint of two in-cells is out"),
        json!({
            "family": limit.family,
            "h": grid.h(),
            "in_cells": cells.len(),
            "concave_radius": concave,
        }),
        notes,
    ))
}

/// `{η : core ⊆ F_η}` against the via-clusters and direct limit regions.
pub fn check_core_equality(
    prefix: &SequencePrefix,
    ideal: &IdealSpec,
    family: &RoughFamilySpec,
    bbox: &Aabb,
    h: f64,
) -> Result<CheckReport> {
    if !family.is_closed() {
        return Err(Error::RequiresClosedFamily);
    }
    let timer = Timer::start();
    let cluster = auto_cluster(prefix, ideal, h)?;
    let core = core_set(&cluster)?;
    let narrow = core.centers(Label::In);
    let wide: Vec<Vec<f64>> = (0..core.grid().len())
        .filter(|&i| core.label(i).possibly_in())
        .map(|i| core.grid().center(i))
        .collect();
    let blur = *cluster.eps.last().unwrap();
    let from_core = GridRegion::from_fn(Grid::covering(bbox, h)?, |eta| {
        if covers(&wide, family, eta, 0.0).expect("nonempty") == Coverage::Yes {
            Label::In
        } else if covers(&narrow, family, eta, blur).expect("nonempty") == Coverage::No {
            Label::Out
        } else {
            Label::Uncertain
        }
    });
    let via = rough_limit_via_clusters(&cluster, family, bbox, h)?;
    let direct = rough_limit_direct(prefix, ideal, family, bbox, h)?;
    let vs_via = from_core.compare(&via.region, 2.0 * h)?;
    let vs_direct = from_core.compare(&direct.region, 2.0 * h)?;
    let mut witnesses =
        disagreement_witnesses(&from_core, &vs_via.disagreements, "core cover differs from Γ̂ cover");
    witnesses.extend(disagreement_witnesses(
        &from_core,
        &vs_direct.disagreements,
        "core cover differs from direct limit set",
    ));
    let status = if witnesses.is_empty() { Status::Pass } else { Status::Fail };
    Ok(timer.report(
        "core_equality",
        status,
        witnesses,
        json!({
            "family": family,
            "ideal": ideal,
            "h": h,
            "horizon": prefix.horizon(),
            "core_cells": narrow.len(),
            "limit_in_cells": from_core.count(Label::In),
        }),
        Vec::new(),
    ))
}

fn centroid(points: &[Vec<f64>]) -> Vec<f64> {
    let k = points[0].len();
    (0..k)
        .map(|d| points.iter().map(|p| p[d]).sum::<f64>() / points.len() as f64)
        .collect()
}

fn diameter(points: &[Vec<f64>]) -> Result<f64> {
    let vertices = convex_hull(points)?.vertices();
    let mut best = 0.0f64;
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            best = best.max(dist(a, b));
        }
    }
    Ok(best)
}

/// Three conditions that hold or fail together for constant-radius closed
/// balls: ideal convergence to the core centroid, a singleton core, and a
/// limit set that is a ball of radius `r`.
pub fn check_equivalence_core(
    prefix: &SequencePrefix,
    ideal: &IdealSpec,
    r: f64,
    h: f64,
) -> Result<CheckReport> {
    let timer = Timer::start();
    let cluster = auto_cluster(prefix, ideal, h)?;
    let blur = *cluster.eps.last().unwrap();
    let core = core_set(&cluster)?;
    let core_cells = core.centers(Label::In);
    let candidate = centroid(&core_cells);

    let distances: Vec<f64> = prefix.points().map(|x| dist(x, &candidate)).collect();
    let limsup = ideal_limsup(&ideal.at_horizon(prefix.horizon())?, &distances)?;
    let convergent = limsup.value <= blur;

    let diam = diameter(&core_cells)?;
    let singleton = diam <= 2.0 * blur;

    let family = RoughFamilySpec::closed_ball(r);
    let bbox = auto_limit_box(prefix, ideal, &family, h)?;
    let limit = rough_limit_direct(prefix, ideal, &family, &bbox, h)?;
    let limit_cells = limit.region.centers(Label::In);
    let (ball, center) = if limit_cells.is_empty() {
        (false, None)
    } else {
        let c = centroid(&limit_cells);
        let expected = GridRegion::from_predicate(limit.region.grid().clone(), |p| {
            dist(p, &c) <= r + TOL
        });
        let cmp = limit.region.compare_to_expected(&expected, 2.0 * h)?;
        (cmp.agrees(), Some(c))
    };

    let agree = convergent == singleton && singleton == ball;
    let mut witnesses = vec![
        Witness::scalar("limsup_distance_to_core_centroid", limsup.value),
        Witness::scalar("core_diameter", diam),
    ];
    let mut notes = Vec::new();
    if let Some(c) = &center {
        witnesses.push(Witness::Cell {
            coords: c.clone(),
            detail: "centroid of the limit set".into(),
        });
    }
    if agree && convergent {
        notes.push(format!("convergent: η = η′ = η″ ≈ {candidate:?}"));
    }
    if limsup.low_confidence {
        notes.push("limsup scan stopped on an inconclusive verdict".into());
    }
    Ok(timer.report(
        "equivalence_core",
        if agree { Status::Pass } else { Status::Fail },
        witnesses,
        json!({
            "r": r,
            "h": h,
            "ideal": ideal,
            "horizon": prefix.horizon(),
            "convergent": convergent,
            "singleton_core": singleton,
            "ball_limit_set": ball,
            "core_centroid": candidate,
        }),
        notes,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorSpaceCase {
    pub eta: Vec<f64>,
    pub eta_prime: Vec<f64>,
    pub r: f64,
    pub ideal: IdealSpec,
    pub k_max: usize,
    pub horizon: usize,
    pub h: f64,
}

fn require_split(ideal: &IdealSpec, partition: &IndexPattern, horizon: usize) -> Result<()> {
    let resolved = ideal.at_horizon(horizon)?;
    let on = partition.at_horizon(horizon);
    for (name, set) in [("partition", on.clone()), ("complement", on.complement())] {
        let v = resolved.is_small(&set)?.verdict;
        if v != Verdict::NotSmall {
            return Err(Error::Precondition(format!(
                "{name} class must be not small under {}, got {v:?}",
                ideal.name()
            )));
        }
    }
    Ok(())
}

/// Scales the two-point sequence on `{η, η′}` by `k = 1, 2, …` until the
/// constant-radius limit set becomes empty.
pub fn check_vector_space_failure(case: &VectorSpaceCase) -> Result<CheckReport> {
    if case.eta == case.eta_prime {
        return Err(Error::Precondition("η and η′ must differ".into()));
    }
    if !(case.r > 0.0 && case.r.is_finite()) {
        return Err(Error::Precondition("radius must be positive".into()));
    }
    require_split(&case.ideal, &IndexPattern::Evens, case.horizon)?;
    let timer = Timer::start();
    let family = RoughFamilySpec::closed_ball(case.r);
    let gap = dist(&case.eta, &case.eta_prime);
    let oracle = (1..=case.k_max).find(|&k| k as f64 * gap / 2.0 > case.r);

    let mut witnesses = Vec::new();
    let mut found = None;
    let mut notes = Vec::new();
    for k in 1..=case.k_max {
        let kf = k as f64;
        let spec = SequenceSpec::TwoPoint {
            on: case.eta.iter().map(|x| kf * x).collect(),
            off: case.eta_prime.iter().map(|x| kf * x).collect(),
            partition: IndexPattern::Evens,
        };
        let x = generate(&spec, case.horizon)?;
        let cluster = auto_cluster(&x, &case.ideal, case.h)?;
        let cert = nonemptiness_certificate(&cluster, case.r)?;
        if let Certificate::Empty { radius, .. } = cert {
            let bbox = auto_limit_box(&x, &case.ideal, &family, case.h)?;
            let direct = rough_limit_direct(&x, &case.ideal, &family, &bbox, case.h)?;
            let stray = direct.region.count(Label::In);
            witnesses.push(Witness::scalar("k", kf));
            witnesses.push(Witness::scalar("chebyshev_radius", radius));
            if stray > 0 {
                notes.push(format!("direct limit set keeps {stray} in-cells at k = {k}"));
            }
            found = Some((k, stray == 0));
            break;
        }
        if let Certificate::Boundary { .. } = cert {
            notes.push(format!("k = {k} is within resolution of the boundary"));
        }
    }
    let status = match found {
        Some((_, true)) => Status::Pass,
        _ => {
            if found.is_none() {
                witnesses.push(Witness::scalar("k_max", case.k_max as f64));
            }
            Status::Fail
        }
    };
    Ok(timer.report(
        "vector_space_failure",
        status,
        witnesses,
        json!({
            "eta": case.eta,
            "eta_prime": case.eta_prime,
            "r": case.r,
            "ideal": case.ideal,
            "k_max": case.k_max,
            "horizon": case.horizon,
            "h": case.h,
            "smallest_failing_k": found.map(|f| f.0),
            "oracle_k": oracle,
        }),
        notes,
    ))
}

/// Both witness sequences (`r` on the partition and `r + step` off it, and
/// the swap) have limit set `[r + step − 1, r + 1]` for `F_η = [η − 1, η + 1]`.
pub fn check_prop12_witnesses(
    r: f64,
    step: f64,
    ideal: &IdealSpec,
    partition: &IndexPattern,
    horizon: usize,
    h: f64,
) -> Result<CheckReport> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::Precondition(format!("step {step} outside (0, 1]")));
    }
    require_split(ideal, partition, horizon)?;
    let timer = Timer::start();
    let (lo, hi) = (r + step - 1.0, r + 1.0);
    let family = RoughFamilySpec::closed_ball(1.0);
    let bbox = Aabb::new(vec![lo - 0.5], vec![hi + 0.5])?;
    let mut witnesses = Vec::new();
    let mut ranges = Vec::new();
    for (name, base, delta) in [("x", r, step), ("y", r + step, -step)] {
        let spec = SequenceSpec::TwoValue {
            base,
            step: delta,
            partition: partition.clone(),
        };
        let x = generate(&spec, horizon)?;
        let limit = rough_limit_direct(&x, ideal, &family, &bbox, h)?;
        let expected = GridRegion::from_predicate(limit.region.grid().clone(), |p| {
            p[0] >= lo - TOL && p[0] <= hi + TOL
        });
        let cmp = limit.region.compare_to_expected(&expected, 2.0 * h)?;
        let cells = limit.region.centers(Label::In);
        ranges.push(json!({
            "sequence": name,
            "in_lo": cells.first().map(|c| c[0]),
            "in_hi": cells.last().map(|c| c[0]),
        }));
        if cells.is_empty() {
            witnesses.push(Witness::scalar(&format!("{name}_in_cells"), 0.0));
        }
        witnesses.extend(disagreement_witnesses(
            &limit.region,
            &cmp.disagreements,
            &format!("{name}: label differs from [r + h − 1, r + 1]"),
        ));
    }
    let status = if witnesses.is_empty() { Status::Pass } else { Status::Fail };
    Ok(timer.report(
        "prop12_witnesses",
        status,
        witnesses,
        json!({
            "r": r,
            "step": step,
            "ideal": ideal,
            "partition": partition,
            "horizon": horizon,
            "h": h,
            "expected": [lo, hi],
            "computed": ranges,
        }),
        Vec::new(),
    ))
}

/// Golden comparison: labels must match the expected set except on
/// uncertain cells and within `width` of the expected set's boundary.
pub fn check_region(
    name: &str,
    region: &GridRegion,
    expected: impl Fn(&[f64]) -> bool + Sync,
    width: f64,
) -> Result<CheckReport> {
    let timer = Timer::start();
    let raster = GridRegion::from_predicate(region.grid().clone(), expected);
    let cmp = region.compare_to_expected(&raster, width)?;
    let status = if cmp.agrees() { Status::Pass } else { Status::Fail };
    Ok(timer.report(
        name,
        status,
        disagreement_witnesses(region, &cmp.disagreements, "label differs from the expected set"),
        json!({
            "h": region.grid().h(),
            "band": width,
            "compared_cells": cmp.compared,
            "excluded_cells": cmp.excluded,
            "in_cells": region.count(Label::In),
            "uncertain_cells": region.count(Label::Uncertain),
        }),
        Vec::new(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_space_failure_needs_distinct_points() {
        let case = VectorSpaceCase {
            eta: vec![0.0],
            eta_prime: vec![0.0],
            r: 1.0,
            ideal: IdealSpec::Fin,
            k_max: 5,
            horizon: 1_000,
            h: 0.01,
        };
        assert!(matches!(check_vector_space_failure(&case), Err(Error::Precondition(_))));
    }

    #[test]
    fn prop12_rejects_small_partition_classes() {
        let err = check_prop12_witnesses(
            0.0,
            1.0,
            &IdealSpec::density(0.01),
            &IndexPattern::Squares,
            10_000,
            0.01,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn closedness_flags_open_balls() {
        let h = 0.01;
        let x = generate(&SequenceSpec::Alternating, 4_000).unwrap();
        let bbox = Aabb::new(vec![-3.0], vec![3.0]).unwrap();
        let open = rough_limit_direct(&x, &IdealSpec::Fin, &RoughFamilySpec::open_ball(3.0), &bbox, h)
            .unwrap();
        let report = check_closedness(&x, &open).unwrap();
        assert_eq!(report.status, Status::HypothesisViolated);
        assert_eq!(report.witnesses.len(), 2);
        let closed =
            rough_limit_direct(&x, &IdealSpec::Fin, &RoughFamilySpec::closed_ball(3.0), &bbox, h)
                .unwrap();
        assert_eq!(check_closedness(&x, &closed).unwrap().status, Status::Pass);
    }
}
