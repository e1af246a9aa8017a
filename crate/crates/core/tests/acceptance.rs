//! End-to-end acceptance checks, one line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roughlim::analysis::{
    auto_limit_box, cluster_set, default_eps, rough_limit_direct, LimitReport,
};
use roughlim::family::{AffinePiece, RadiusFn, RoughFamilySpec};
use roughlim::geometry::{minimal_enclosing_ball, Aabb, GridRegion, Label};
use roughlim::ideal::{density_estimate, ideal_limsup, IdealSpec, IndexPattern};
use roughlim::sequence::{generate, SequencePrefix, SequenceSpec};
use roughlim::verify::{
    check_characterization, check_closedness, check_convexity, check_core_equality,
    check_equivalence_core, check_vector_space_failure, CheckReport, Status, VectorSpaceCase,
};
use roughlim::{DEFAULT_HORIZON, DEFAULT_RESOLUTION};

type Outcome = Result<String, String>;

const H: f64 = DEFAULT_RESOLUTION;

fn line(lo: f64, hi: f64) -> Aabb {
    Aabb::new(vec![lo], vec![hi]).unwrap()
}

fn seq(spec: SequenceSpec, n: usize) -> SequencePrefix {
    generate(&spec, n).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn expect_status(report: &CheckReport, status: Status) -> Result<(), String> {
    ensure(report.status == status, || {
        format!(
            "{}: {:?}, expected {:?}; witnesses {:?}",
            report.name, report.status, status, report.witnesses
        )
    })
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

/// Labels agree with `expected` except on uncertain cells and within `2h` of its boundary.
fn within_band(region: &GridRegion, expected: impl Fn(&[f64]) -> bool + Sync) -> Result<(), String> {
    let raster = GridRegion::from_predicate(region.grid().clone(), expected);
    let h = region.grid().h();
    let cmp = region.compare_to_expected(&raster, 2.0 * h).unwrap();
    ensure(cmp.agrees(), || {
        let at: Vec<f64> = cmp
            .disagreements
            .iter()
            .take(5)
            .map(|&i| region.grid().center(i)[0])
            .collect();
        format!("{} disagreeing cells, first at {at:?}", cmp.disagreements.len())
    })
}

fn in_range(l: &LimitReport) -> Option<(f64, f64)> {
    let c = l.region.centers(Label::In);
    Some((c.first()?[0], c.last()?[0]))
}

fn rationals() -> Outcome {
    let start = Instant::now();
    let x = seq(SequenceSpec::RationalsEnumeration, DEFAULT_HORIZON);
    let bbox = line(-0.5, 1.5);
    let l = rough_limit_direct(&x, &IdealSpec::Fin, &RoughFamilySpec::open_ball(0.5), &bbox, H)
        .unwrap();
    let inside = l.region.centers(Label::In);
    ensure(inside.len() == 1 && (inside[0][0] - 0.5).abs() < 1e-9, || {
        format!("L̂ in-cells {inside:?}")
    })?;
    let unsure = l.region.centers(Label::Uncertain);
    ensure(
        unsure.len() <= 2 && unsure.iter().all(|p| (p[0] - 0.5).abs() < H + 1e-9),
        || format!("uncertain cells {unsure:?}"),
    )?;
    let c = cluster_set(&x, &IdealSpec::Fin, &bbox, H, &default_eps(H)).unwrap();
    within_band(&c.region, |p| (0.0..=1.0).contains(&p[0])).map_err(|e| format!("Γ̂: {e}"))?;
    within_time(start, Duration::from_secs(10))?;
    Ok(format!(
        "L̂ = {{0.5}}, Γ̂ in-cells {} of [0, 1], {:.1} s",
        c.region.count(Label::In),
        start.elapsed().as_secs_f64()
    ))
}

fn alternating() -> Outcome {
    let start = Instant::now();
    let x = seq(SequenceSpec::Alternating, DEFAULT_HORIZON);
    let bbox = line(-3.0, 3.0);
    let open = rough_limit_direct(&x, &IdealSpec::Fin, &RoughFamilySpec::open_ball(3.0), &bbox, H)
        .unwrap();
    within_band(&open.region, |p| p[0].abs() < 2.0).map_err(|e| format!("open: {e}"))?;
    let (lo, hi) = in_range(&open).ok_or("open: no in-cells")?;
    ensure((lo + 2.0 - H).abs() < 1e-9 && (hi - 2.0 + H).abs() < 1e-9, || {
        format!("open in-cells span [{lo}, {hi}]")
    })?;
    let closed =
        rough_limit_direct(&x, &IdealSpec::Fin, &RoughFamilySpec::closed_ball(3.0), &bbox, H)
            .unwrap();
    within_band(&closed.region, |p| p[0].abs() <= 2.0).map_err(|e| format!("closed: {e}"))?;
    let (lo, hi) = in_range(&closed).ok_or("closed: no in-cells")?;
    ensure((lo + 2.0).abs() < 1e-9 && (hi - 2.0).abs() < 1e-9, || {
        format!("closed in-cells span [{lo}, {hi}]")
    })?;
    expect_status(&check_closedness(&x, &closed).unwrap(), Status::Pass)?;
    within_time(start, Duration::from_secs(10))?;
    Ok(format!(
        "open (−2, 2), closed [−2, 2] and closed under probing, {:.1} s",
        start.elapsed().as_secs_f64()
    ))
}

fn prop12() -> Outcome {
    let family = RoughFamilySpec::closed_ball(1.0);
    for (r, step) in [(0.0, 1.0), (1.0, 0.5), (-2.0, 0.25)] {
        let (lo, hi) = (r + step - 1.0, r + 1.0);
        let bbox = line(lo - 0.5, hi + 0.5);
        for (base, delta) in [(r, step), (r + step, -step)] {
            let x = seq(
                SequenceSpec::TwoValue {
                    base,
                    step: delta,
                    partition: IndexPattern::Evens,
                },
                DEFAULT_HORIZON,
            );
            let l = rough_limit_direct(&x, &IdealSpec::Fin, &family, &bbox, H).unwrap();
            within_band(&l.region, |p| p[0] >= lo && p[0] <= hi)
                .map_err(|e| format!("(r, h) = ({r}, {step}), base {base}: {e}"))?;
            let (a, b) = in_range(&l).ok_or("no in-cells")?;
            ensure((a - lo).abs() < 1e-9 && (b - hi).abs() < 1e-9, || {
                format!("(r, h) = ({r}, {step}): in-cells span [{a}, {b}], expected [{lo}, {hi}]")
            })?;
        }
    }
    Ok("all six witness sequences give [r + h − 1, r + 1]".into())
}

fn random_line(seed: u64) -> SequenceSpec {
    SequenceSpec::RandomBounded {
        seed,
        lo: vec![-1.0],
        hi: vec![1.0],
        atoms: if seed % 5 == 4 { None } else { Some(2 + seed as usize % 4) },
    }
}

fn characterization() -> Outcome {
    let start = Instant::now();
    let h = 0.01;
    let mut cases = 0;
    for seed in 0..25 {
        let x = seq(random_line(seed), 10_000);
        for r in [0.5, 1.0, 2.0] {
            let bbox = auto_limit_box(&x, &IdealSpec::Fin, &RoughFamilySpec::closed_ball(r), h)
                .unwrap();
            let report = check_characterization(&x, &IdealSpec::Fin, r, &bbox, h).unwrap();
            expect_status(&report, Status::Pass).map_err(|e| format!("seed {seed}, r {r}: {e}"))?;
            cases += 1;
        }
    }
    within_time(start, Duration::from_secs(60))?;
    Ok(format!(
        "{cases} cases agree outside the 2h band, {:.1} s",
        start.elapsed().as_secs_f64()
    ))
}

fn core_equivalence() -> Outcome {
    let h = 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..10 {
        let x = seq(
            SequenceSpec::RandomBounded {
                seed: rng.gen(),
                lo: vec![-1.0, -1.0],
                hi: vec![1.0, 1.0],
                atoms: Some(rng.gen_range(2..=5)),
            },
            10_000,
        );
        let family = RoughFamilySpec::closed_ball(1.0 + 0.5 * (i % 2) as f64);
        let bbox = auto_limit_box(&x, &IdealSpec::Fin, &family, h).unwrap();
        let report = check_core_equality(&x, &IdealSpec::Fin, &family, &bbox, h).unwrap();
        expect_status(&report, Status::Pass).map_err(|e| format!("2-D case {i}: {e}"))?;
    }

    let h = 0.01;
    let x = seq(SequenceSpec::Convergent { limit: vec![0.0] }, 10_000);
    let report = check_equivalence_core(&x, &IdealSpec::Fin, 1.0, h).unwrap();
    expect_status(&report, Status::Pass)?;
    let p = &report.parameters;
    ensure(
        p["convergent"] == true && p["singleton_core"] == true && p["ball_limit_set"] == true,
        || format!("convergent prefix: {p}"),
    )?;
    let centroid = p["core_centroid"][0].as_f64().unwrap();
    ensure(centroid.abs() <= 2.0 * h, || format!("core centroid {centroid}"))?;
    let family = RoughFamilySpec::closed_ball(1.0);
    let l = rough_limit_direct(&x, &IdealSpec::Fin, &family, &line(-2.0, 2.0), h).unwrap();
    within_band(&l.region, |q| q[0].abs() <= 1.0).map_err(|e| format!("L̂ vs B₁(0): {e}"))?;

    let x = seq(SequenceSpec::Alternating, 10_000);
    let report = check_equivalence_core(&x, &IdealSpec::Fin, 1.0, h).unwrap();
    expect_status(&report, Status::Pass)?;
    let p = &report.parameters;
    ensure(
        p["convergent"] == false && p["singleton_core"] == false && p["ball_limit_set"] == false,
        || format!("alternating prefix: {p}"),
    )?;
    Ok("10 random 2-D core equalities; 1/(n+1) has core {0} and L̂ = B₁(0); alternating has neither".into())
}

fn convexity() -> Outcome {
    let x = seq(SequenceSpec::Alternating, 10_000);
    let h = 0.01;
    let bbox = line(-3.0, 3.0);
    let tent = RadiusFn::ConcaveMinAffine {
        pieces: vec![
            AffinePiece { slope: vec![0.0], offset: 1.0 },
            AffinePiece { slope: vec![-0.5], offset: 2.0 },
            AffinePiece { slope: vec![0.5], offset: 2.0 },
        ],
    };
    for f in [RoughFamilySpec::closed_ball(3.0), RoughFamilySpec::ClosedBall { radius: tent }] {
        let l = rough_limit_direct(&x, &IdealSpec::Fin, &f, &bbox, h).unwrap();
        expect_status(&check_convexity(&l).unwrap(), Status::Pass)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..10 {
        let y = seq(random_line(rng.gen()), 10_000);
        let radius = if i % 2 == 0 {
            RadiusFn::Constant { value: rng.gen_range(0.5..2.0) }
        } else {
            RadiusFn::ConcaveMinAffine {
                pieces: vec![
                    AffinePiece { slope: vec![0.0], offset: rng.gen_range(1.0..2.0) },
                    AffinePiece { slope: vec![rng.gen_range(-0.3..0.3)], offset: 2.0 },
                ],
            }
        };
        let l = rough_limit_direct(&y, &IdealSpec::Fin, &RoughFamilySpec::ClosedBall { radius }, &bbox, h)
            .unwrap();
        expect_status(&check_convexity(&l).unwrap(), Status::Pass)
            .map_err(|e| format!("random case {i}: {e}"))?;
    }
    // r = 3 except r = 0 on (−0.5, 0.5): L = [−2, −0.5] ∪ [0.5, 2].
    let notched = RadiusFn::UpperSemicontinuousTable {
        origin: vec![-3.0],
        spacing: 0.5,
        shape: vec![13],
        values: (0..13).map(|i| if (5..=7).contains(&i) { 0.0 } else { 3.0 }).collect(),
    };
    let l = rough_limit_direct(&x, &IdealSpec::Fin, &RoughFamilySpec::ClosedBall { radius: notched }, &bbox, h)
        .unwrap();
    let report = check_convexity(&l).unwrap();
    expect_status(&report, Status::HypothesisViolated)?;
    Ok(format!(
        "12 concave cases convex; notched radius recorded as hypothesis-violated with {} witnesses",
        report.witnesses.len()
    ))
}

fn vector_space() -> Outcome {
    let (eta, eta_prime, r) = (0.0f64, 1.0f64, 1.0);
    let report = check_vector_space_failure(&VectorSpaceCase {
        eta: vec![eta],
        eta_prime: vec![eta_prime],
        r,
        ideal: IdealSpec::Fin,
        k_max: 10,
        horizon: 10_000,
        h: 0.01,
    })
    .unwrap();
    expect_status(&report, Status::Pass)?;
    let oracle = (1..).find(|&k| k as f64 * (eta - eta_prime).abs() / 2.0 > r).unwrap();
    let found = report.parameters["smallest_failing_k"].as_u64();
    ensure(found == Some(oracle) && oracle == 3, || {
        format!("smallest failing k {found:?}, oracle {oracle}")
    })?;
    Ok(format!("smallest failing scale k = {oracle}"))
}

/// Smallest ball over all circles through two or three of the points that contain every point.
fn meb_oracle(points: &[[f64; 2]]) -> ([f64; 2], f64) {
    let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let covers = |c: [f64; 2], r: f64| points.iter().all(|&p| d(c, p) <= r * (1.0 + 1e-12) + 1e-12);
    let mut best = ([points[0][0], points[0][1]], if points.len() == 1 { 0.0 } else { f64::INFINITY });
    let n = points.len();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (points[i], points[j]);
            let c = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            let r = d(a, b) / 2.0;
            if r < best.1 && covers(c, r) {
                best = (c, r);
            }
            for &q in &points[j + 1..] {
                let det = 2.0 * ((b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]));
                if det.abs() < 1e-12 {
                    continue;
                }
                let (b2, q2) = (
                    (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2),
                    (q[0] - a[0]).powi(2) + (q[1] - a[1]).powi(2),
                );
                let ux = ((q[1] - a[1]) * b2 - (b[1] - a[1]) * q2) / det;
                let uy = ((b[0] - a[0]) * q2 - (q[0] - a[0]) * b2) / det;
                let c = [a[0] + ux, a[1] + uy];
                let r = d(c, a);
                if r < best.1 && covers(c, r) {
                    best = (c, r);
                }
            }
        }
    }
    best
}

fn meb() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = (0.0f64, 0.0f64);
    for set in 0..100 {
        let n = rng.gen_range(1..=6);
        let points: Vec<[f64; 2]> = (0..n)
            .map(|_| [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)])
            .collect();
        let (c, r) = meb_oracle(&points);
        let ball = minimal_enclosing_ball(&points.iter().map(|p| p.to_vec()).collect::<Vec<_>>())
            .unwrap();
        let dr = (ball.radius - r).abs();
        let dc = (ball.center[0] - c[0]).abs().max((ball.center[1] - c[1]).abs());
        ensure(dr <= 1e-9 && dc <= 1e-8, || {
            format!("set {set} {points:?}: radius {} vs {r}, center {:?} vs {c:?}", ball.radius, ball.center)
        })?;
        worst = (worst.0.max(dr), worst.1.max(dc));
    }
    Ok(format!(
        "100 sets, max radius error {:.1e}, max center error {:.1e}",
        worst.0, worst.1
    ))
}

fn ideal_machinery() -> Outcome {
    let squares = IndexPattern::Squares.at_horizon(10_000);
    let density = density_estimate(&squares, &[10_000]).unwrap();
    ensure(density == 0.01, || format!("density of squares {density}"))?;

    let spiked = SequenceSpec::PerturbedAlternating {
        spikes: IndexPattern::Squares,
    };
    let mut classical = Vec::new();
    for n in [10_000, DEFAULT_HORIZON] {
        let x = seq(spiked.clone(), n);
        let distances: Vec<f64> = x.points().map(|p| p[0].abs()).collect();
        let fin = ideal_limsup(&IdealSpec::Fin.at_horizon(n).unwrap(), &distances).unwrap();
        classical.push(fin.value);
        if n == DEFAULT_HORIZON {
            let ideal = IdealSpec::density(0.01).at_horizon(n).unwrap();
            let dens = ideal_limsup(&ideal, &distances).unwrap();
            ensure((dens.value - 1.0).abs() <= 1.0 / n as f64, || {
                format!("density limsup {} at N = {n}", dens.value)
            })?;
        }
    }
    ensure(classical[1] > classical[0] && classical[0] >= 5_000.0, || {
        format!("classical limsup {classical:?}")
    })?;
    Ok(format!(
        "squares density 0.01; density limsup 1; classical limsup {} → {} as N grows",
        classical[0], classical[1]
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("rationals counterexample", rationals),
        ("alternating counterexample", alternating),
        ("two-valued witnesses", prop12),
        ("direct vs via-clusters characterization", characterization),
        ("core equality and three-way equivalence", core_equivalence),
        ("convexity", convexity),
        ("vector-space failure", vector_space),
        ("minimal enclosing ball oracle", meb),
        ("ideal machinery", ideal_machinery),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
