//! Witness sequence generators and CSV ingestion.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_dim, Aabb};
use crate::ideal::IndexPattern;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceSpec {
    /// `base` on the partition, `base + step` off it.
    TwoValue {
        base: f64,
        step: f64,
        partition: IndexPattern,
    },
    /// `on` on the partition, `off` off it.
    TwoPoint {
        on: Vec<f64>,
        off: Vec<f64>,
        partition: IndexPattern,
    },
    /// `(-1)^n`.
    Alternating,
    /// Reduced fractions `p/q ∈ [0, 1]`, ordered by `q` then `p`.
    RationalsEnumeration,
    /// `(-1)^n`, replaced by `n` on the spike set.
    PerturbedAlternating { spikes: IndexPattern },
    Csv { path: PathBuf },
    /// Uniform in the box `[lo, hi]`; with `atoms`, each term is drawn
    /// uniformly from that many uniform points of the box instead.
    RandomBounded {
        seed: u64,
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        atoms: Option<usize>,
    },
    /// `limit + 1/(n+1)` in every coordinate.
    Convergent { limit: Vec<f64> },
    Constant { value: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Generated { spec: SequenceSpec, horizon: usize },
    File { path: PathBuf, rows: usize },
}

/// The first `N` terms of a sequence in `ℝ^k`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequencePrefix {
    points: Vec<f64>,
    dim: usize,
    provenance: Provenance,
}

impl SequencePrefix {
    pub fn new(points: Vec<f64>, dim: usize, provenance: Provenance) -> Result<Self> {
        check_dim(dim)?;
        if points.is_empty() {
            return Err(Error::EmptySequence);
        }
        if points.len() % dim != 0 {
            return Err(Error::InvalidSequence(format!(
                "{} coordinates do not split into points of dimension {dim}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i / dim));
        }
        Ok(SequencePrefix {
            points,
            dim,
            provenance,
        })
    }

    pub fn from_points(points: &[Vec<f64>], provenance: Provenance) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptySequence)?.len();
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        Self::new(points.concat(), dim, provenance)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn point(&self, n: usize) -> &[f64] {
        &self.points[n * self.dim..(n + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim)
    }

    /// Flat row-major coordinates.
    pub fn as_flat(&self) -> &[f64] {
        &self.points
    }

    /// Every term multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        SequencePrefix {
            points: self.points.iter().map(|x| k * x).collect(),
            dim: self.dim,
            provenance: self.provenance.clone(),
        }
    }

    /// One point per line, comma separated, shortest round-trip decimals.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.points.len() * 8);
        for p in self.points() {
            for (d, x) in p.iter().enumerate() {
                if d > 0 {
                    out.push(',');
                }
                write!(out, "{x}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn generate(spec: &SequenceSpec, horizon: usize) -> Result<SequencePrefix> {
    if horizon == 0 {
        return Err(Error::EmptyPrefix);
    }
    let provenance = Provenance::Generated {
        spec: spec.clone(),
        horizon,
    };
    let scalar = |f: &dyn Fn(usize) -> f64| (0..horizon).map(f).collect::<Vec<f64>>();
    let (points, dim) = match spec {
        SequenceSpec::TwoValue {
            base,
            step,
            partition,
        } => {
            check_partition(partition, horizon)?;
            let hi = base + step;
            (scalar(&|n| if partition.contains(n) { *base } else { hi }), 1)
        }
        SequenceSpec::TwoPoint { on, off, partition } => {
            if on.len() != off.len() {
                return Err(Error::DimensionMismatch {
                    expected: on.len(),
                    found: off.len(),
                });
            }
            check_partition(partition, horizon)?;
            let points = (0..horizon)
                .flat_map(|n| if partition.contains(n) { on } else { off })
                .copied()
                .collect();
            (points, on.len())
        }
        SequenceSpec::Alternating => (scalar(&alternating), 1),
        SequenceSpec::RationalsEnumeration => (rationals().take(horizon).collect(), 1),
        SequenceSpec::PerturbedAlternating { spikes } => (
            scalar(&|n| {
                if spikes.contains(n) {
                    n as f64
                } else {
                    alternating(n)
                }
            }),
            1,
        ),
        SequenceSpec::Csv { path } => {
            let loaded = load_csv(path)?;
            if loaded.horizon() < horizon {
                return Err(Error::InvalidSequence(format!(
                    "{} holds {} points, fewer than the horizon {horizon}",
                    path.display(),
                    loaded.horizon()
                )));
            }
            let mut points = loaded.points;
            points.truncate(horizon * loaded.dim);
            return SequencePrefix::new(points, loaded.dim, loaded.provenance);
        }
        SequenceSpec::RandomBounded {
            seed,
            lo,
            hi,
            atoms,
        } => {
            let bbox = Aabb::new(lo.clone(), hi.clone())?;
            if (0..bbox.dim()).any(|d| bbox.side(d) <= 0.0) {
                return Err(Error::InvalidSequence("random box is degenerate".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                lo.iter().zip(hi).map(|(a, b)| rng.gen_range(*a..*b)).collect()
            };
            let points = match atoms {
                None => (0..horizon).flat_map(|_| draw(&mut rng)).collect(),
                Some(0) => {
                    return Err(Error::InvalidSequence("atoms must be positive".into()));
                }
                Some(m) => {
                    let atoms: Vec<Vec<f64>> = (0..*m).map(|_| draw(&mut rng)).collect();
                    (0..horizon)
                        .flat_map(|_| atoms[rng.gen_range(0..*m)].iter().copied())
                        .collect()
                }
            };
            (points, lo.len())
        }
        SequenceSpec::Convergent { limit } => {
            let points = (0..horizon)
                .flat_map(|n| limit.iter().map(move |c| c + 1.0 / (n as f64 + 1.0)))
                .collect();
            (points, limit.len())
        }
        SequenceSpec::Constant { value } => (value.repeat(horizon), value.len()),
    };
    SequencePrefix::new(points, dim, provenance)
}

fn alternating(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_partition(partition: &IndexPattern, horizon: usize) -> Result<()> {
    if horizon < 2 {
        return Ok(());
    }
    let members = (0..horizon).filter(|&n| partition.contains(n)).count();
    if members == 0 || members == horizon {
        return Err(Error::InvalidSequence(
            "partition and its complement must both be nonempty".into(),
        ));
    }
    Ok(())
}

/// `0/1, 1/1, 1/2, 1/3, 2/3, 1/4, 3/4, …`
pub fn rationals() -> impl Iterator<Item = f64> {
    (1u64..).flat_map(|q| {
        let range = if q == 1 { 0..=1 } else { 1..=q - 1 };
        range
            .filter(move |p| p.gcd(&q) == 1)
            .map(move |p| p as f64 / q as f64)
    })
}

/// Reads one point per row, comma separated, no header.
pub fn load_csv(path: &Path) -> Result<SequencePrefix> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file);
    let mut points = Vec::new();
    let mut dim = 0;
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: 0,
            message: e.to_string(),
        })?;
        if rows == 0 {
            dim = record.len();
        } else if record.len() != dim {
            return Err(Error::RaggedRow {
                row,
                expected: dim,
                found: record.len(),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let x: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row,
                column: j + 1,
                message: format!("{cell:?} is not a number"),
            })?;
            if !x.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: j + 1,
                    message: format!("{cell:?} is not finite"),
                });
            }
            points.push(x);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::EmptySequence);
    }
    SequencePrefix::new(
        points,
        dim,
        Provenance::File {
            path: path.to_path_buf(),
            rows,
        },
    )
}

/// Per-side padding for [`bounding_box`]: `max(fraction · side, min)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub fraction: f64,
    pub min: f64,
}

impl Margin {
    /// 10% of each side, at least one cell of width `h`.
    pub fn with_cell(h: f64) -> Self {
        Margin { fraction: 0.1, min: h }
    }
}

impl Default for Margin {
    fn default() -> Self {
        Margin::with_cell(crate::DEFAULT_RESOLUTION)
    }
}

pub fn bounding_box(prefix: &SequencePrefix, margin: Margin) -> Aabb {
    let tight = Aabb::around(prefix.points()).expect("prefixes are nonempty");
    let pad: Vec<f64> = (0..tight.dim())
        .map(|d| (margin.fraction * tight.side(d)).max(margin.min))
        .collect();
    Aabb {
        lo: tight.lo.iter().zip(&pad).map(|(x, p)| x - p).collect(),
        hi: tight.hi.iter().zip(&pad).map(|(x, p)| x + p).collect(),
    }
}
