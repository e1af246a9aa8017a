use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::checks::*;
use super::{CheckReport, Status};
use crate::analysis::{
    auto_limit_box, cluster_set, default_eps, rough_limit_direct, LimitReport,
};
use crate::error::Result;
use crate::family::{AffinePiece, RadiusFn, RoughFamilySpec};
use crate::geometry::{Aabb, TOL};
use crate::ideal::{IdealSpec, IndexPattern};
use crate::sequence::{generate, SequencePrefix, SequenceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Golden,
    Properties,
    All,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "golden" => Ok(Suite::Golden),
            "properties" => Ok(Suite::Properties),
            "all" => Ok(Suite::All),
            _ => Err(format!("unknown suite {s:?} (golden, properties, all)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseResult {
    pub case: String,
    pub expected: Status,
    pub report: CheckReport,
    pub unexpected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub cases: Vec<CaseResult>,
    pub unexpected: usize,
    pub runtime_ms: f64,
}

struct Runner {
    cases: Vec<CaseResult>,
}

impl Runner {
    fn case(&mut self, case: &str, expected: Status, run: impl FnOnce() -> Result<CheckReport>) {
        let report = run().unwrap_or_else(|e| CheckReport {
            name: case.into(),
            status: Status::Uncertain,
            witnesses: Vec::new(),
            parameters: json!(null),
            runtime_ms: 0.0,
            notes: vec![format!("error: {e}")],
        });
        self.cases.push(CaseResult {
            case: case.into(),
            expected,
            unexpected: report.status != expected,
            report,
        });
    }
}

const N: usize = 10_000;
const H: f64 = 0.01;

fn seq(spec: SequenceSpec, horizon: usize) -> Result<SequencePrefix> {
    generate(&spec, horizon)
}

fn line(lo: f64, hi: f64) -> Aabb {
    Aabb {
        lo: vec![lo],
        hi: vec![hi],
    }
}

fn auto_limit(x: &SequencePrefix, ideal: &IdealSpec, family: &RoughFamilySpec, h: f64) -> Result<LimitReport> {
    let bbox = auto_limit_box(x, ideal, family, h)?;
    rough_limit_direct(x, ideal, family, &bbox, h)
}

/// `r(η) = min(1, 2 − |η|/2)`.
pub(crate) fn tent_radius() -> RadiusFn {
    RadiusFn::ConcaveMinAffine {
        pieces: vec![
            AffinePiece { slope: vec![0.0], offset: 1.0 },
            AffinePiece { slope: vec![-0.5], offset: 2.0 },
            AffinePiece { slope: vec![0.5], offset: 2.0 },
        ],
    }
}

/// Radius 3 except on `(−0.5, 0.5)`, where it drops to 0: upper
/// semicontinuous but not concave.
pub(crate) fn notched_radius() -> RadiusFn {
    let values = (0..13).map(|i| if (5..=7).contains(&i) { 0.0 } else { 3.0 }).collect();
    RadiusFn::UpperSemicontinuousTable {
        origin: vec![-3.0],
        spacing: 0.5,
        shape: vec![13],
        values,
    }
}

fn golden(run: &mut Runner) {
    let fin = IdealSpec::Fin;

    run.case("characterization/alternating r=3", Status::Pass, || {
        let x = seq(SequenceSpec::Alternating, N)?;
        check_characterization(&x, &fin, 3.0, &line(-3.0, 3.0), H)
    });
    run.case("characterization/rationals r=1/2", Status::Pass, || {
        let x = seq(SequenceSpec::RationalsEnumeration, N)?;
        check_characterization(&x, &fin, 0.5, &line(-0.5, 1.5), H)
    });
    run.case("characterization/spiked alternating, density r=1", Status::Pass, || {
        let x = seq(
            SequenceSpec::PerturbedAlternating {
                spikes: IndexPattern::Squares,
            },
            100_000,
        )?;
        check_characterization(&x, &IdealSpec::density(0.01), 1.0, &line(-2.0, 2.0), H)
    });

    run.case("closedness/closed r=3", Status::Pass, || {
        let x = seq(SequenceSpec::Alternating, N)?;
        let l = rough_limit_direct(&x, &fin, &RoughFamilySpec::closed_ball(3.0), &line(-3.0, 3.0), H)?;
        check_closedness(&x, &l)
    });
    run.case("closedness/open r=3", Status::HypothesisViolated, || {
        let x = seq(SequenceSpec::Alternating, N)?;
        let l = rough_limit_direct(&x, &fin, &RoughFamilySpec::open_ball(3.0), &line(-3.0, 3.0), H)?;
        check_closedness(&x, &l)
    });
    run.case("closedness/convergent r=0", Status::Pass, || {
        let x = seq(SequenceSpec::Convergent { limit: vec![0.25] }, N)?;
        let l = rough_limit_direct(&x, &fin, &RoughFamilySpec::closed_ball(0.0), &line(-0.5, 1.0), H)?;
        check_closedness(&x, &l)
    });

    run.case("convexity/constant r=3", Status::Pass, || {
        let x = seq(SequenceSpec::Alternating, N)?;
        check_convexity(&auto_limit(&x, &fin, &RoughFamilySpec::closed_ball(3.0), H)?)
    });
    run.case("convexity/concave min-affine radius", Status::Pass, || {
        let x = seq(SequenceSpec::Alternating, N)?;
        let f = RoughFamilySpec::ClosedBall { radius: tent_radius() };
        check_convexity(&rough_limit_direct(&x, &fin, &f, &line(-3.0, 3.0), H)?)
    });
    run.case("convexity/notched radius", Status::HypothesisViolated, || {
        let x = seq(SequenceSpec::Alternating, N)?;
        let f = RoughFamilySpec::ClosedBall { radius: notched_radius() };
        check_convexity(&rough_limit_direct(&x, &fin, &f, &line(-3.0, 3.0), H)?)
    });

    run.case("core_equality/alternating r=3", Status::Pass, || {
        let x = seq(SequenceSpec::Alternating, N)?;
        check_core_equality(&x, &fin, &RoughFamilySpec::closed_ball(3.0), &line(-3.0, 3.0), H)
    });
    run.case("core_equality/convergent r=1", Status::Pass, || {
        let x = seq(SequenceSpec::Convergent { limit: vec![0.5] }, N)?;
        check_core_equality(&x, &fin, &RoughFamilySpec::closed_ball(1.0), &line(-1.0, 2.0), H)
    });

    run.case("equivalence_core/convergent r=1", Status::Pass, || {
        let x = seq(SequenceSpec::Convergent { limit: vec![0.5] }, N)?;
        check_equivalence_core(&x, &fin, 1.0, H)
    });
    run.case("equivalence_core/alternating r=1", Status::Pass, || {
        let x = seq(SequenceSpec::Alternating, N)?;
        check_equivalence_core(&x, &fin, 1.0, H)
    });
    run.case("equivalence_core/constant r=1/2", Status::Pass, || {
        let x = seq(SequenceSpec::Constant { value: vec![-0.3] }, N)?;
        check_equivalence_core(&x, &fin, 0.5, H)
    });

    for (eta, eta_prime, r) in [(0.0, 1.0, 1.0), (0.0, 1.0, 0.4)] {
        run.case(
            &format!("vector_space_failure/{eta},{eta_prime} r={r}"),
            Status::Pass,
            || {
                check_vector_space_failure(&VectorSpaceCase {
                    eta: vec![eta],
                    eta_prime: vec![eta_prime],
                    r,
                    ideal: IdealSpec::Fin,
                    k_max: 8,
                    horizon: N,
                    h: H,
                })
            },
        );
    }

    for (r, step) in [(0.0, 1.0), (1.0, 0.5), (-2.0, 0.25)] {
        run.case(&format!("prop12_witnesses/r={r} step={step}"), Status::Pass, || {
            check_prop12_witnesses(r, step, &fin, &IndexPattern::Evens, N, H)
        });
    }
    run.case("prop12_witnesses/density, multiples of 3", Status::Pass, || {
        check_prop12_witnesses(0.5, 0.5, &IdealSpec::density(0.01), &IndexPattern::Multiples { modulus: 3 }, N, H)
    });

    let fine = crate::DEFAULT_RESOLUTION;
    run.case("region/rationals open r=1/2", Status::Pass, || {
        let x = seq(SequenceSpec::RationalsEnumeration, 100_000)?;
        let l = rough_limit_direct(&x, &fin, &RoughFamilySpec::open_ball(0.5), &line(-0.5, 1.5), fine)?;
        check_region("region/rationals open r=1/2", &l.region, |p| (p[0] - 0.5).abs() <= TOL, 2.0 * fine)
    });
    run.case("region/alternating open r=3", Status::Pass, || {
        let x = seq(SequenceSpec::Alternating, N)?;
        let l = rough_limit_direct(&x, &fin, &RoughFamilySpec::open_ball(3.0), &line(-3.0, 3.0), H)?;
        check_region("region/alternating open r=3", &l.region, |p| p[0].abs() < 2.0, 2.0 * H)
    });
    run.case("region/alternating cluster set", Status::Pass, || {
        let x = seq(SequenceSpec::Alternating, N)?;
        let c = cluster_set(&x, &fin, &line(-2.0, 2.0), H, &default_eps(H))?;
        check_region("region/alternating cluster set", &c.region, |p| (p[0].abs() - 1.0).abs() <= TOL, 2.0 * H)
    });
    run.case("region/rationals cluster set", Status::Pass, || {
        let x = seq(SequenceSpec::RationalsEnumeration, N)?;
        let c = cluster_set(&x, &fin, &line(-0.5, 1.5), H, &default_eps(H))?;
        check_region("region/rationals cluster set", &c.region, |p| (-TOL..=1.0 + TOL).contains(&p[0]), 2.0 * H)
    });
    run.case("region/spiked alternating cluster set, density", Status::Pass, || {
        let x = seq(
            SequenceSpec::PerturbedAlternating {
                spikes: IndexPattern::Squares,
            },
            100_000,
        )?;
        let ideal = IdealSpec::density(0.01);
        let c = cluster_set(&x, &ideal, &line(-2.0, 2.0), H, &default_eps(H))?;
        check_region(
            "region/spiked alternating cluster set, density",
            &c.region,
            |p| (p[0].abs() - 1.0).abs() <= TOL,
            2.0 * H,
        )
    });
}

fn random_atoms(rng: &mut ChaCha8Rng, dim: usize) -> SequenceSpec {
    SequenceSpec::RandomBounded {
        seed: rng.gen(),
        lo: vec![-1.0; dim],
        hi: vec![1.0; dim],
        atoms: Some(rng.gen_range(2..=5)),
    }
}

fn properties(run: &mut Runner, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fin = IdealSpec::Fin;

    for i in 0..25 {
        let spec = if i % 5 == 4 {
            SequenceSpec::RandomBounded {
                seed: rng.gen(),
                lo: vec![-1.0],
                hi: vec![1.0],
                atoms: None,
            }
        } else {
            random_atoms(&mut rng, 1)
        };
        for r in [0.5, 1.0, 2.0] {
            run.case(&format!("characterization/random 1-D #{i} r={r}"), Status::Pass, || {
                let x = seq(spec.clone(), N)?;
                let bbox = auto_limit_box(&x, &fin, &RoughFamilySpec::closed_ball(r), H)?;
                check_characterization(&x, &fin, r, &bbox, H)
            });
        }
    }

    let h2 = 0.05;
    for i in 0..10 {
        let spec = random_atoms(&mut rng, 2);
        let r = [1.0, 1.5][i % 2];
        run.case(&format!("core_equality/random 2-D #{i} r={r}"), Status::Pass, || {
            let x = seq(spec, N)?;
            let family = RoughFamilySpec::closed_ball(r);
            let bbox = auto_limit_box(&x, &fin, &family, h2)?;
            check_core_equality(&x, &fin, &family, &bbox, h2)
        });
    }

    for i in 0..10 {
        let spec = random_atoms(&mut rng, 1);
        let pieces = vec![
            AffinePiece { slope: vec![0.0], offset: rng.gen_range(1.0..2.0) },
            AffinePiece { slope: vec![rng.gen_range(-0.3..0.3)], offset: 2.0 },
            AffinePiece { slope: vec![rng.gen_range(-0.3..0.3)], offset: 2.0 },
        ];
        run.case(&format!("convexity/random concave radius #{i}"), Status::Pass, || {
            let x = seq(spec, N)?;
            let f = RoughFamilySpec::ClosedBall {
                radius: RadiusFn::ConcaveMinAffine { pieces },
            };
            check_convexity(&rough_limit_direct(&x, &fin, &f, &line(-3.0, 3.0), H)?)
        });
    }
}

/// Runs a suite. Case parameters of the property suite are drawn from `seed`.
pub fn run_suite(suite: Suite, seed: u64) -> SuiteReport {
    let start = Instant::now();
    let mut run = Runner { cases: Vec::new() };
    if matches!(suite, Suite::Golden | Suite::All) {
        golden(&mut run);
    }
    if matches!(suite, Suite::Properties | Suite::All) {
        properties(&mut run, seed);
    }
    let unexpected = run.cases.iter().filter(|c| c.unexpected).count();
    SuiteReport {
        suite,
        seed,
        cases: run.cases,
        unexpected,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn notched_radius_profile() {
        let r = notched_radius();
        assert_eq!(r.eval(&[0.0]), 0.0);
        assert_eq!(r.eval(&[0.5]), 3.0);
        assert_eq!(r.eval(&[-1.0]), 3.0);
        assert!(!r.is_concave());
        assert!(tent_radius().is_concave());
    }

    #[test]
    fn golden_suite_meets_expectations() {
        let report = run_suite(Suite::Golden, 0);
        for c in &report.cases {
            assert!(!c.unexpected, "{}: {:?} {:?} {:?}", c.case, c.report.status, c.report.witnesses, c.report.notes);
        }
    }
}

