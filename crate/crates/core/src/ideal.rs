//! Finite-horizon ideals on the nonnegative integers.
//!
//! An ideal is a family of "small" index sets closed under subsets and finite
//! unions that contains every finite set. Membership is a tail property, so on
//! a prefix `[0, N)` we can only give a three-valued verdict: [`Verdict::Small`],
//! [`Verdict::NotSmall`] or [`Verdict::Inconclusive`].
//!
//! Every built-in ideal decides from per-bin tallies (counts, or weighted
//! masses) over a fixed partition of `[0, N)` into consecutive bins. The
//! "small" thresholds and the "not small" thresholds are separated by a factor
//! of two, which keeps the verdicts monotone under inclusion and stable under
//! finite unions:
//!
//! * `S ⊆ T`, `T` small ⇒ `S` is never not-small;
//! * `S`, `T` small ⇒ `S ∪ T` is never not-small.

use bitvec::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default threshold below which an upper-density surrogate counts as small.
pub const DEFAULT_DELTA: f64 = 0.01;
/// Default geometric decay required of per-octave increments of a summable set.
pub const DEFAULT_DECAY: f64 = 0.9;
/// Default per-octave harmonic mass below which a summable tail counts as small.
pub const DEFAULT_OCTAVE_MASS: f64 = 0.01;
/// Default harmonic budget of the summable ideal.
pub const DEFAULT_BUDGET: f64 = 20.0;

/// Number of doubling windows the summable ideal inspects in the tail.
const SUMMABLE_OCTAVES: u32 = 4;

/// A subset of `[0, horizon)` stored as one bit per index.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IndexSet {
    bits: BitVec<u64, Lsb0>,
}

impl std::fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IndexSet")
            .field("horizon", &self.horizon())
            .field("len", &self.len())
            .finish()
    }
}

impl IndexSet {
    pub fn empty(horizon: usize) -> Self {
        IndexSet {
            bits: bitvec![u64, Lsb0; 0; horizon],
        }
    }

    pub fn full(horizon: usize) -> Self {
        IndexSet {
            bits: bitvec![u64, Lsb0; 1; horizon],
        }
    }

    pub fn from_fn(horizon: usize, mut member: impl FnMut(usize) -> bool) -> Self {
        let mut bits = BitVec::with_capacity(horizon);
        bits.extend((0..horizon).map(&mut member));
        IndexSet { bits }
    }

    /// Builds a set from explicit indices; indices at or beyond the horizon are dropped.
    pub fn from_indices(horizon: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty(horizon);
        for n in indices {
            if n < horizon {
                set.bits.set(n, true);
            }
        }
        set
    }

    pub fn horizon(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, n: usize) -> bool {
        n < self.bits.len() && self.bits[n]
    }

    pub fn insert(&mut self, n: usize) {
        self.bits.set(n, true);
    }

    /// Number of members.
    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.not_any()
    }

    /// Number of members below `w`.
    pub fn count_below(&self, w: usize) -> usize {
        self.bits[..w.min(self.horizon())].count_ones()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }

    pub fn complement(&self) -> Self {
        IndexSet {
            bits: !self.bits.clone(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.horizon(), other.horizon(), "horizon mismatch");
        let mut bits = self.bits.clone();
        bits |= other.bits.as_bitslice();
        IndexSet { bits }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        assert_eq!(self.horizon(), other.horizon(), "horizon mismatch");
        let mut bits = self.bits.clone();
        bits &= other.bits.as_bitslice();
        IndexSet { bits }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.horizon() == other.horizon() && self.iter().all(|n| other.contains(n))
    }
}

/// Horizon-independent description of an index set, resolved with [`IndexPattern::at_horizon`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndexPattern {
    Evens,
    Odds,
    Squares,
    /// Multiples of `modulus` (including 0).
    Multiples { modulus: usize },
    /// `[start, end)`.
    Range { start: usize, end: usize },
    Explicit { indices: Vec<usize> },
}

impl IndexPattern {
    pub fn contains(&self, n: usize) -> bool {
        match self {
            IndexPattern::Evens => n % 2 == 0,
            IndexPattern::Odds => n % 2 == 1,
            IndexPattern::Squares => is_square(n),
            IndexPattern::Multiples { modulus } => *modulus != 0 && n % modulus == 0,
            IndexPattern::Range { start, end } => (*start..*end).contains(&n),
            IndexPattern::Explicit { indices } => indices.contains(&n),
        }
    }

    pub fn at_horizon(&self, horizon: usize) -> IndexSet {
        match self {
            IndexPattern::Explicit { indices } => {
                IndexSet::from_indices(horizon, indices.iter().copied())
            }
            _ => IndexSet::from_fn(horizon, |n| self.contains(n)),
        }
    }
}

pub fn is_square(n: usize) -> bool {
    let r = (n as f64).sqrt() as usize;
    (r.saturating_sub(1)..=r + 1).any(|k| k * k == n)
}

/// Prefix windows `w` over which densities `|S ∩ [0, w)| / w` are measured.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowSchedule {
    /// `N/2, 3N/4, 7N/8, N`.
    #[default]
    Dyadic,
    Explicit { windows: Vec<usize> },
}

impl WindowSchedule {
    pub fn resolve(&self, horizon: usize) -> Result<Vec<usize>> {
        let windows = match self {
            WindowSchedule::Dyadic => {
                let mut w: Vec<usize> = [horizon / 2, horizon * 3 / 4, horizon * 7 / 8, horizon]
                    .into_iter()
                    .filter(|&w| w > 0)
                    .collect();
                w.dedup();
                w
            }
            WindowSchedule::Explicit { windows } => windows.clone(),
        };
        validate_windows(&windows, horizon)?;
        Ok(windows)
    }
}

fn validate_windows(windows: &[usize], horizon: usize) -> Result<()> {
    if windows.is_empty() {
        return Err(Error::NoWindows);
    }
    if windows[0] == 0 {
        return Err(Error::InvalidWindows("windows must be positive".into()));
    }
    if windows.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::InvalidWindows("windows must be strictly increasing".into()));
    }
    let last = *windows.last().unwrap();
    if last != horizon {
        return Err(Error::InvalidWindows(format!(
            "last window {last} must equal the horizon {horizon}"
        )));
    }
    Ok(())
}

/// The tail half of a schedule: its last `ceil(len / 2)` windows.
fn tail_half(len: usize) -> std::ops::Range<usize> {
    len / 2..len
}

/// Upper-density surrogate: the largest `|S ∩ [0, w)| / w` over the tail half of `windows`.
pub fn density_estimate(set: &IndexSet, windows: &[usize]) -> Result<f64> {
    if windows.is_empty() {
        return Err(Error::NoWindows);
    }
    if let Some(&w) = windows.iter().find(|&&w| w == 0 || w > set.horizon()) {
        return Err(Error::InvalidWindows(format!(
            "window {w} outside (0, {}]",
            set.horizon()
        )));
    }
    Ok(windows[tail_half(windows.len())]
        .iter()
        .map(|&w| set.count_below(w) as f64 / w as f64)
        .fold(0.0, f64::max))
}

/// Per-index weights of a weight-functional ideal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weights {
    /// One nonnegative weight per index; must cover the horizon.
    Explicit { values: Vec<f64> },
    /// `1 / (n + 1)`: logarithmic density.
    Logarithmic,
    /// `(n + 1)^(-exponent)`.
    Power { exponent: f64 },
}

impl Weights {
    fn materialize(&self, horizon: usize) -> Result<Vec<f64>> {
        let w: Vec<f64> = match self {
            Weights::Explicit { values } => {
                if values.len() < horizon {
                    return Err(Error::InvalidIdeal(format!(
                        "{} weights do not cover horizon {horizon}",
                        values.len()
                    )));
                }
                values[..horizon].to_vec()
            }
            Weights::Logarithmic => (0..horizon).map(|n| 1.0 / (n as f64 + 1.0)).collect(),
            Weights::Power { exponent } => (0..horizon)
                .map(|n| (n as f64 + 1.0).powf(-exponent))
                .collect(),
        };
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidIdeal(
                "weights must be finite and nonnegative".into(),
            ));
        }
        Ok(w)
    }
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}
fn default_decay() -> f64 {
    DEFAULT_DECAY
}
fn default_budget() -> f64 {
    DEFAULT_BUDGET
}
fn default_octave_mass() -> f64 {
    DEFAULT_OCTAVE_MASS
}

/// A finitely testable notion of smallness for index sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IdealSpec {
    /// Finite sets: small iff the final tail segment is empty.
    Fin,
    /// Sets of upper asymptotic density zero.
    Density {
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default)]
        windows: WindowSchedule,
    },
    /// Sets `S` with `Σ_{n∈S} 1/(n+1) < ∞`.
    Summable {
        #[serde(default = "default_budget")]
        budget: f64,
        #[serde(default = "default_decay")]
        decay: f64,
        /// Per-octave harmonic mass below which a tail counts as vanishing.
        #[serde(default = "default_octave_mass")]
        octave_mass: f64,
    },
    /// Sets of zero upper weighted density `Σ_{n∈S, n<w} a_n / Σ_{n<w} a_n`.
    WeightFunctional {
        weights: Weights,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default)]
        windows: WindowSchedule,
    },
}

impl IdealSpec {
    pub fn density(delta: f64) -> Self {
        IdealSpec::Density {
            delta,
            windows: WindowSchedule::Dyadic,
        }
    }

    pub fn summable(budget: f64) -> Self {
        IdealSpec::Summable {
            budget,
            decay: DEFAULT_DECAY,
            octave_mass: DEFAULT_OCTAVE_MASS,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            IdealSpec::Fin => "fin",
            IdealSpec::Density { .. } => "density",
            IdealSpec::Summable { .. } => "summable",
            IdealSpec::WeightFunctional { .. } => "weight_functional",
        }
    }

    /// Resolves windows and weights for prefixes of length `horizon`.
    pub fn at_horizon(&self, horizon: usize) -> Result<Ideal> {
        if horizon == 0 {
            return Err(Error::EmptyPrefix);
        }
        let check_delta = |delta: f64| {
            if delta > 0.0 && delta <= 0.5 {
                Ok(())
            } else {
                Err(Error::InvalidIdeal(format!("delta {delta} outside (0, 0.5]")))
            }
        };
        let (bounds, weights) = match self {
            IdealSpec::Fin => (WindowSchedule::Dyadic.resolve(horizon)?, None),
            IdealSpec::Density { delta, windows } => {
                check_delta(*delta)?;
                (windows.resolve(horizon)?, None)
            }
            IdealSpec::Summable {
                budget,
                decay,
                octave_mass,
            } => {
                if !(*budget > 0.0 && budget.is_finite()) {
                    return Err(Error::InvalidIdeal(format!("budget {budget} must be positive")));
                }
                if !(*decay > 0.0 && *decay < 1.0) {
                    return Err(Error::InvalidIdeal(format!("decay {decay} outside (0, 1)")));
                }
                if !(*octave_mass > 0.0 && *octave_mass <= std::f64::consts::LN_2 / 2.0) {
                    return Err(Error::InvalidIdeal(format!(
                        "octave mass {octave_mass} outside (0, ln 2 / 2]"
                    )));
                }
                let mut bounds: Vec<usize> = (0..=SUMMABLE_OCTAVES)
                    .rev()
                    .map(|j| horizon >> j)
                    .filter(|&w| w > 0)
                    .collect();
                bounds.dedup();
                let weights = Weights::Logarithmic.materialize(horizon)?;
                (bounds, Some(weights))
            }
            IdealSpec::WeightFunctional {
                weights,
                delta,
                windows,
            } => {
                check_delta(*delta)?;
                (windows.resolve(horizon)?, Some(weights.materialize(horizon)?))
            }
        };
        let window_mass = match &weights {
            Some(w) => bounds.iter().map(|&b| w[..b].iter().sum()).collect(),
            None => bounds.iter().map(|&b| b as f64).collect(),
        };
        Ok(Ideal {
            spec: self.clone(),
            horizon,
            bounds,
            weights,
            window_mass,
        })
    }

    /// Resolves at the set's horizon and tests it.
    pub fn is_small(&self, set: &IndexSet) -> Result<SmallnessVerdict> {
        self.at_horizon(set.horizon())?.is_small(set)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Small,
    NotSmall,
    Inconclusive,
}

/// Verdict plus the estimator values it was decided from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallnessVerdict {
    pub verdict: Verdict,
    /// Density per tail window, members per tail segment, or harmonic mass per tail octave.
    pub trace: Vec<f64>,
    /// Total harmonic mass (summable ideal only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total: Option<f64>,
}

/// Per-bin member counts and masses of one index set.
#[derive(Debug, Clone, PartialEq)]
pub struct Tally {
    counts: Vec<usize>,
    mass: Vec<f64>,
}

impl Tally {
    pub fn members(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// An [`IdealSpec`] resolved at a fixed horizon.
#[derive(Debug, Clone)]
pub struct Ideal {
    spec: IdealSpec,
    horizon: usize,
    /// Upper bin bounds: bin `i` is `[bounds[i-1], bounds[i])` with `bounds[-1] = 0`.
    bounds: Vec<usize>,
    weights: Option<Vec<f64>>,
    /// Total weight below each bound.
    window_mass: Vec<f64>,
}

impl Ideal {
    pub fn spec(&self) -> &IdealSpec {
        &self.spec
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn bounds(&self) -> &[usize] {
        &self.bounds
    }

    pub fn empty_tally(&self) -> Tally {
        Tally {
            counts: vec![0; self.bounds.len()],
            mass: vec![0.0; self.bounds.len()],
        }
    }

    /// Tallies `{n < N : member(n)}` bin by bin.
    pub fn tally(&self, mut member: impl FnMut(usize) -> bool) -> Tally {
        let mut tally = self.empty_tally();
        let mut start = 0;
        for (bin, &end) in self.bounds.iter().enumerate() {
            let mut count = 0usize;
            match &self.weights {
                Some(w) => {
                    let mut mass = 0.0;
                    for (n, wn) in w.iter().enumerate().take(end).skip(start) {
                        if member(n) {
                            count += 1;
                            mass += wn;
                        }
                    }
                    tally.mass[bin] = mass;
                }
                None => {
                    for n in start..end {
                        if member(n) {
                            count += 1;
                        }
                    }
                    tally.mass[bin] = count as f64;
                }
            }
            tally.counts[bin] = count;
            start = end;
        }
        tally
    }

    /// Adds index `n` to a tally; the caller guarantees it was absent.
    pub fn add(&self, tally: &mut Tally, n: usize) {
        let bin = self.bounds.partition_point(|&b| b <= n);
        tally.counts[bin] += 1;
        tally.mass[bin] += self.weights.as_ref().map_or(1.0, |w| w[n]);
    }

    pub fn is_small(&self, set: &IndexSet) -> Result<SmallnessVerdict> {
        if set.horizon() != self.horizon {
            return Err(Error::HorizonMismatch {
                expected: self.horizon,
                found: set.horizon(),
            });
        }
        Ok(self.verdict(&self.tally(|n| set.contains(n))))
    }

    /// Bins that make up the tail: every bin but the first, or the only bin.
    fn tail_bins(&self) -> std::ops::Range<usize> {
        let m = self.bounds.len();
        if m > 1 {
            1..m
        } else {
            0..m
        }
    }

    pub fn verdict(&self, tally: &Tally) -> SmallnessVerdict {
        match &self.spec {
            IdealSpec::Fin => {
                let trace: Vec<f64> = tally.counts[self.tail_bins()]
                    .iter()
                    .map(|&c| c as f64)
                    .collect();
                let verdict = if *trace.last().unwrap() == 0.0 {
                    Verdict::Small
                } else if trace.iter().all(|&c| c > 0.0) {
                    Verdict::NotSmall
                } else {
                    Verdict::Inconclusive
                };
                SmallnessVerdict {
                    verdict,
                    trace,
                    total: None,
                }
            }
            IdealSpec::Density { delta, .. } | IdealSpec::WeightFunctional { delta, .. } => {
                let mut below = 0.0;
                let prefix: Vec<f64> = tally
                    .mass
                    .iter()
                    .map(|m| {
                        below += m;
                        below
                    })
                    .collect();
                let trace: Vec<f64> = tail_half(self.bounds.len())
                    .map(|i| {
                        if self.window_mass[i] > 0.0 {
                            prefix[i] / self.window_mass[i]
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let upper = trace.iter().copied().fold(0.0, f64::max);
                let lower = trace.iter().copied().fold(f64::INFINITY, f64::min);
                let verdict = if upper < *delta {
                    Verdict::Small
                } else if lower >= 2.0 * delta {
                    Verdict::NotSmall
                } else {
                    Verdict::Inconclusive
                };
                SmallnessVerdict {
                    verdict,
                    trace,
                    total: None,
                }
            }
            IdealSpec::Summable {
                budget,
                decay,
                octave_mass,
            } => {
                let total: f64 = tally.mass.iter().sum();
                let trace: Vec<f64> = tally.mass[self.tail_bins()].to_vec();
                let last = *trace.last().unwrap();
                let shrinking = trace.windows(2).all(|p| p[1] <= decay * p[0]);
                let projected = total + last * decay / (1.0 - decay);
                let upper = trace.iter().copied().fold(0.0, f64::max);
                let lower = trace.iter().copied().fold(f64::INFINITY, f64::min);
                let verdict = if total >= 2.0 * budget || lower >= 2.0 * octave_mass {
                    Verdict::NotSmall
                } else if shrinking && projected < *budget && upper < *octave_mass {
                    Verdict::Small
                } else {
                    Verdict::Inconclusive
                };
                SmallnessVerdict {
                    verdict,
                    trace,
                    total: Some(total),
                }
            }
        }
    }
}

/// Free-function form of [`IdealSpec::is_small`].
pub fn is_small(ideal: &IdealSpec, set: &IndexSet) -> Result<SmallnessVerdict> {
    ideal.is_small(set)
}

/// Result of [`ideal_limsup`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Limsup {
    pub value: f64,
    /// The scan stopped on an inconclusive verdict rather than a not-small one.
    pub low_confidence: bool,
    pub thresholds_scanned: usize,
}

/// `inf { a : {n : v_n > a} is small }` over the distinct values of the prefix.
///
/// Thresholds are scanned in descending order; the scan stops at the first
/// threshold whose exceedance set is not small and returns the last small one.
pub fn ideal_limsup(ideal: &Ideal, values: &[f64]) -> Result<Limsup> {
    if values.is_empty() {
        return Err(Error::EmptyPrefix);
    }
    if values.len() != ideal.horizon() {
        return Err(Error::HorizonMismatch {
            expected: ideal.horizon(),
            found: values.len(),
        });
    }
    if let Some(n) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(n));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let mut tally = ideal.empty_tally();
    let mut best = values[order[0]];
    let mut scanned = 0;
    let mut low_confidence = false;
    let mut i = 0;
    while i < order.len() {
        let threshold = values[order[i]];
        scanned += 1;
        match ideal.verdict(&tally).verdict {
            Verdict::Small => best = threshold,
            v => {
                low_confidence = v == Verdict::Inconclusive;
                break;
            }
        }
        while i < order.len() && values[order[i]] == threshold {
            ideal.add(&mut tally, order[i]);
            i += 1;
        }
    }
    Ok(Limsup {
        value: best,
        low_confidence,
        thresholds_scanned: scanned,
    })
}
