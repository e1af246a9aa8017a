//! Rough ideal limit sets, ideal cluster sets and ideal cores of sequences in `ℝ^k`,
//! computed from finite prefixes.

pub mod analysis;
pub mod error;
pub mod family;
pub mod geometry;
pub mod ideal;
pub mod sequence;
pub mod verify;

pub use error::{Error, Result};

/// Default grid resolution `h`.
pub const DEFAULT_RESOLUTION: f64 = 1.0 / 200.0;

/// Default prefix length.
pub const DEFAULT_HORIZON: usize = 100_000;
