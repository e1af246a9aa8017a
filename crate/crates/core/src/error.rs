use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no windows")]
    NoWindows,

    #[error("invalid window schedule: {0}")]
    InvalidWindows(String),

    #[error("horizon mismatch: index set has horizon {found}, ideal is evaluated at {expected}")]
    HorizonMismatch { expected: usize, found: usize },

    #[error("invalid ideal: {0}")]
    InvalidIdeal(String),

    #[error("empty prefix")]
    EmptyPrefix,

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("empty sequence")]
    EmptySequence,

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("ragged row {row}: expected {expected} columns, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid sequence spec: {0}")]
    InvalidSequence(String),

    #[error("empty point set")]
    EmptyPointSet,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} unsupported (1 ≤ k ≤ 8)")]
    UnsupportedDimension(usize),

    #[error("hull regions limited to k ≤ 2")]
    HullDimension,

    #[error("region output limited to k ≤ 2, got k = {0}")]
    RegionDimension(usize),

    #[error("mismatched grids")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("characterization requires closed F_η")]
    RequiresClosedFamily,

    #[error("core undefined for empty Γ̂")]
    EmptyClusterSet,

    #[error("invalid eps schedule: {0}")]
    InvalidEpsSchedule(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}
