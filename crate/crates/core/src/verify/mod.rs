//! Theorem checks on computed regions, and the golden and property suites.

mod checks;
mod suite;

use std::time::Instant;

use serde::Serialize;

pub use checks::{
    check_characterization, check_closedness, check_convexity, check_core_equality,
    check_equivalence_core, check_prop12_witnesses, check_region, check_vector_space_failure,
    VectorSpaceCase,
};
pub use suite::{run_suite, CaseResult, Suite, SuiteReport};

use crate::geometry::GridRegion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Uncertain,
    /// The conclusion failed on an input that drops one of the theorem's hypotheses.
    HypothesisViolated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Cell { coords: Vec<f64>, detail: String },
    Scalar { name: String, value: f64 },
}

impl Witness {
    pub fn scalar(name: &str, value: f64) -> Self {
        Witness::Scalar {
            name: name.into(),
            value,
        }
    }

    pub fn cells(region: &GridRegion, cells: &[usize], detail: &str, limit: usize) -> Vec<Self> {
        cells
            .iter()
            .take(limit)
            .map(|&i| Witness::Cell {
                coords: region.grid().center(i),
                detail: detail.into(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub status: Status,
    pub witnesses: Vec<Witness>,
    pub parameters: serde_json::Value,
    pub runtime_ms: f64,
    pub notes: Vec<String>,
}

/// Most witnesses listed per report.
pub const MAX_WITNESSES: usize = 10;

pub(crate) struct Timer(Instant);

impl Timer {
    pub fn start() -> Self {
        Timer(Instant::now())
    }

    pub fn report(
        self,
        name: &str,
        status: Status,
        witnesses: Vec<Witness>,
        parameters: serde_json::Value,
        notes: Vec<String>,
    ) -> CheckReport {
        debug_assert!(
            status != Status::Fail || !witnesses.is_empty(),
            "{name}: failures carry a witness"
        );
        CheckReport {
            name: name.into(),
            status,
            witnesses,
            parameters,
            runtime_ms: self.0.elapsed().as_secs_f64() * 1e3,
            notes,
        }
    }
}
