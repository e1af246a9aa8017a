//! Labelled grids standing in for subsets of `ℝ¹` and `ℝ²`.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dist2, Aabb};
use crate::error::{Error, Result};

/// Refuse grids with more cells than this.
pub const MAX_CELLS: usize = 4_000_000;

/// Cells centred on the lattice `hℤ^k`, `k ≤ 2`, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    h: f64,
    origin: Vec<i64>,
    shape: Vec<usize>,
}

impl Grid {
    pub fn new(h: f64, origin: Vec<i64>, shape: Vec<usize>) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!("resolution {h} must be positive")));
        }
        if origin.len() != shape.len() {
            return Err(Error::DimensionMismatch {
                expected: origin.len(),
                found: shape.len(),
            });
        }
        let k = shape.len();
        if !(1..=2).contains(&k) {
            return Err(Error::RegionDimension(k));
        }
        let cells = shape.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
        match cells {
            Some(c) if c > 0 && c <= MAX_CELLS => Ok(Grid { h, origin, shape }),
            _ => Err(Error::InvalidGrid(format!(
                "grid of shape {shape:?} exceeds {MAX_CELLS} cells"
            ))),
        }
    }

    /// Lattice points `i·h` inside the box; a box too thin to hold one gets
    /// the lattice point nearest its middle.
    pub fn covering(bbox: &Aabb, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!("resolution {h} must be positive")));
        }
        if bbox.dim() > 2 {
            return Err(Error::RegionDimension(bbox.dim()));
        }
        let mut origin = Vec::with_capacity(bbox.dim());
        let mut shape = Vec::with_capacity(bbox.dim());
        for d in 0..bbox.dim() {
            let lo = (bbox.lo[d] / h - 1e-9).ceil();
            let hi = (bbox.hi[d] / h + 1e-9).floor();
            if (hi - lo).abs() > MAX_CELLS as f64 {
                return Err(Error::InvalidGrid(format!(
                    "box side {} too long for resolution {h}",
                    bbox.side(d)
                )));
            }
            if hi < lo {
                origin.push((0.5 * (bbox.lo[d] + bbox.hi[d]) / h).round() as i64);
                shape.push(1);
            } else {
                origin.push(lo as i64);
                shape.push((hi - lo) as usize + 1);
            }
        }
        Grid::new(h, origin, shape)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn origin(&self) -> &[i64] {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        let mut c = vec![0; self.dim()];
        for d in (0..self.dim()).rev() {
            c[d] = idx % self.shape[d];
            idx /= self.shape[d];
        }
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.shape).fold(0, |acc, (c, s)| acc * s + c)
    }

    pub fn center(&self, idx: usize) -> Vec<f64> {
        self.coords(idx)
            .iter()
            .zip(&self.origin)
            .map(|(&c, &o)| (o + c as i64) as f64 * self.h)
            .collect()
    }

    /// Cell whose center is nearest `p`, if `p` lies within the grid's cells.
    pub fn locate(&self, p: &[f64]) -> Option<usize> {
        let mut coords = Vec::with_capacity(self.dim());
        for d in 0..self.dim() {
            let i = (p[d] / self.h).round() as i64 - self.origin[d];
            if i < 0 || i >= self.shape[d] as i64 {
                return None;
            }
            coords.push(i as usize);
        }
        Some(self.index(&coords))
    }

    /// Box spanned by the cell faces.
    pub fn extent(&self) -> Aabb {
        let half = 0.5 * self.h;
        Aabb {
            lo: self.origin.iter().map(|&o| o as f64 * self.h - half).collect(),
            hi: self
                .origin
                .iter()
                .zip(&self.shape)
                .map(|(&o, &s)| (o + s as i64 - 1) as f64 * self.h + half)
                .collect(),
        }
    }

    /// Cells within Chebyshev index distance `m` of `idx` (excluding `idx`).
    fn neighbourhood(&self, idx: usize, m: usize) -> impl Iterator<Item = usize> + '_ {
        let c = self.coords(idx);
        let m = m as i64;
        let ranges: Vec<(i64, i64)> = c
            .iter()
            .zip(&self.shape)
            .map(|(&ci, &s)| ((ci as i64 - m).max(0), (ci as i64 + m).min(s as i64 - 1)))
            .collect();
        let (r0, r1) = (ranges[0], ranges.get(1).copied().unwrap_or((0, 0)));
        let two = self.dim() == 2;
        (r0.0..=r0.1)
            .flat_map(move |a| (r1.0..=r1.1).map(move |b| (a, b)))
            .map(move |(a, b)| {
                if two {
                    self.index(&[a as usize, b as usize])
                } else {
                    a as usize
                }
            })
            .filter(move |&j| j != idx)
    }

    /// Face-adjacent cells.
    pub fn face_neighbours(&self, idx: usize) -> Vec<usize> {
        let c = self.coords(idx);
        let mut out = Vec::with_capacity(2 * self.dim());
        for d in 0..self.dim() {
            if c[d] > 0 {
                let mut n = c.clone();
                n[d] -= 1;
                out.push(self.index(&n));
            }
            if c[d] + 1 < self.shape[d] {
                let mut n = c.clone();
                n[d] += 1;
                out.push(self.index(&n));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    In,
    Out,
    Uncertain,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::In => "in",
            Label::Out => "out",
            Label::Uncertain => "uncertain",
        }
    }

    /// `in` or `uncertain`.
    pub fn possibly_in(self) -> bool {
        self != Label::Out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRegion {
    grid: Grid,
    labels: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentSummary {
    pub cells: usize,
    /// Bounding box of the component's cell centers.
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSummary {
    pub dim: usize,
    pub h: f64,
    pub shape: Vec<usize>,
    pub cells: usize,
    pub in_cells: usize,
    pub out_cells: usize,
    pub uncertain_cells: usize,
    pub components: Vec<ComponentSummary>,
    /// Length (k = 1) or area (k = 2) of the in-cells.
    pub measure: f64,
    /// Same, counting uncertain cells as in.
    pub measure_upper: f64,
}

/// Cell-wise comparison restricted to cells away from label changes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub compared: usize,
    pub excluded: usize,
    pub disagreements: Vec<usize>,
}

impl Comparison {
    pub fn agrees(&self) -> bool {
        self.disagreements.is_empty()
    }
}

impl GridRegion {
    pub fn new(grid: Grid, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} labels for {} cells",
                labels.len(),
                grid.len()
            )));
        }
        Ok(GridRegion { grid, labels })
    }

    /// Labels every cell center in parallel.
    pub fn from_fn(grid: Grid, label: impl Fn(&[f64]) -> Label + Sync) -> Self {
        let labels = (0..grid.len())
            .into_par_iter()
            .map(|i| label(&grid.center(i)))
            .collect();
        GridRegion { grid, labels }
    }

    /// `in` where the predicate holds, `out` elsewhere.
    pub fn from_predicate(grid: Grid, member: impl Fn(&[f64]) -> bool + Sync) -> Self {
        Self::from_fn(grid, |p| if member(p) { Label::In } else { Label::Out })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, idx: usize) -> Label {
        self.labels[idx]
    }

    pub fn label_at(&self, p: &[f64]) -> Option<Label> {
        self.grid.locate(p).map(|i| self.labels[i])
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn cells(&self, label: Label) -> impl Iterator<Item = usize> + '_ {
        (0..self.labels.len()).filter(move |&i| self.labels[i] == label)
    }

    pub fn centers(&self, label: Label) -> Vec<Vec<f64>> {
        self.cells(label).map(|i| self.grid.center(i)).collect()
    }

    /// Cells within `width` (rounded to whole cells, at least one) of a cell
    /// with a different label.
    pub fn band(&self, width: f64) -> Vec<bool> {
        let m = ((width / self.grid.h).round() as usize).max(1);
        (0..self.labels.len())
            .into_par_iter()
            .map(|i| {
                self.grid
                    .neighbourhood(i, m)
                    .any(|j| self.labels[j] != self.labels[i])
            })
            .collect()
    }

    /// Compares labels on cells that are certain in both regions and lie
    /// outside the `width` bands of both.
    pub fn compare(&self, other: &GridRegion, width: f64) -> Result<Comparison> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let (a, b) = (self.band(width), other.band(width));
        let mut cmp = Comparison {
            compared: 0,
            excluded: 0,
            disagreements: Vec::new(),
        };
        for i in 0..self.labels.len() {
            let (x, y) = (self.labels[i], other.labels[i]);
            if a[i] || b[i] || x == Label::Uncertain || y == Label::Uncertain {
                cmp.excluded += 1;
            } else {
                cmp.compared += 1;
                if x != y {
                    cmp.disagreements.push(i);
                }
            }
        }
        Ok(cmp)
    }

    /// Compares against an exact two-valued raster: disagreements must be
    /// uncertain or lie in the raster's own `width` band.
    pub fn compare_to_expected(&self, expected: &GridRegion, width: f64) -> Result<Comparison> {
        if self.grid != expected.grid {
            return Err(Error::GridMismatch);
        }
        let band = expected.band(width);
        let mut cmp = Comparison {
            compared: 0,
            excluded: 0,
            disagreements: Vec::new(),
        };
        for i in 0..self.labels.len() {
            if band[i] || self.labels[i] == Label::Uncertain {
                cmp.excluded += 1;
            } else {
                cmp.compared += 1;
                if self.labels[i] != expected.labels[i] {
                    cmp.disagreements.push(i);
                }
            }
        }
        Ok(cmp)
    }

    /// Face-connected components of the in-cells, in order of first cell.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.labels.len()];
        let mut out = Vec::new();
        for start in self.cells(Label::In) {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                for j in self.grid.face_neighbours(i) {
                    if !seen[j] && self.labels[j] == Label::In {
                        seen[j] = true;
                        comp.push(j);
                        queue.push_back(j);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn summary(&self) -> RegionSummary {
        let k = self.grid.dim();
        let cell = self.grid.h.powi(k as i32);
        let components = self
            .components()
            .into_iter()
            .map(|comp| {
                let centers: Vec<Vec<f64>> = comp.iter().map(|&i| self.grid.center(i)).collect();
                let bbox = Aabb::around(centers.iter().map(|c| c.as_slice())).unwrap();
                ComponentSummary {
                    cells: comp.len(),
                    lo: bbox.lo,
                    hi: bbox.hi,
                }
            })
            .collect();
        let (i, o, u) = (
            self.count(Label::In),
            self.count(Label::Out),
            self.count(Label::Uncertain),
        );
        RegionSummary {
            dim: k,
            h: self.grid.h,
            shape: self.grid.shape.clone(),
            cells: self.labels.len(),
            in_cells: i,
            out_cells: o,
            uncertain_cells: u,
            components,
            measure: i as f64 * cell,
            measure_upper: (i + u) as f64 * cell,
        }
    }

    /// Header `x,label` or `x,y,label`, then one row per cell.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(if self.grid.dim() == 1 { "x,label\n" } else { "x,y,label\n" });
        for (i, l) in self.labels.iter().enumerate() {
            for c in self.grid.center(i) {
                write!(out, "{c},").unwrap();
            }
            out.push_str(l.as_str());
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

/// One-sided Hausdorff excess: the largest distance from an in-cell of `a`
/// to the nearest in-cell of `b` (infinite when `b` has none and `a` some).
pub fn excess(a: &GridRegion, b: &GridRegion) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    let targets = b.centers(Label::In);
    let worst = a
        .cells(Label::In)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&i| {
            if b.labels[i] == Label::In {
                return 0.0;
            }
            let c = a.grid.center(i);
            targets
                .iter()
                .map(|t| dist2(&c, t))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(lo: f64, hi: f64, h: f64) -> Grid {
        Grid::covering(&Aabb::new(vec![lo], vec![hi]).unwrap(), h).unwrap()
    }

    #[test]
    fn lattice_alignment() {
        let g = line(-1.2, 1.2, 0.1);
        assert_eq!(g.shape(), &[25]);
        assert!((g.center(0)[0] + 1.2).abs() < 1e-12);
        assert_eq!(g.locate(&[0.0]).map(|i| g.center(i)[0]), Some(0.0));
        assert_eq!(g.locate(&[5.0]), None);

        let thin = Grid::covering(&Aabb::new(vec![0.31], vec![0.32]).unwrap(), 0.1).unwrap();
        assert_eq!(thin.shape(), &[1]);
        assert!((thin.center(0)[0] - 0.3).abs() < 1e-12);

        let e = g.extent();
        assert!((e.lo[0] + 1.25).abs() < 1e-12 && (e.hi[0] - 1.25).abs() < 1e-12);
        assert!(Grid::covering(&Aabb::new(vec![0.0; 3], vec![1.0; 3]).unwrap(), 0.1).is_err());
    }

    #[test]
    fn excess_examples() {
        let g = line(-0.5, 1.5, 0.1);
        let a = GridRegion::from_predicate(g.clone(), |p| p[0].abs() < 1e-9);
        let b = GridRegion::from_predicate(g.clone(), |p| (p[0] - 1.0).abs() < 1e-9);
        assert_eq!(excess(&a, &a).unwrap(), 0.0);
        assert!((excess(&a, &b).unwrap() - 1.0).abs() <= 0.1);

        let big = GridRegion::from_predicate(g.clone(), |p| p[0] > -0.25 && p[0] < 1.25);
        assert_eq!(excess(&a, &big).unwrap(), 0.0);
        assert!(excess(&big, &a).unwrap() > 1.0);

        let other = line(0.0, 1.0, 0.1);
        let c = GridRegion::from_predicate(other, |_| true);
        assert!(matches!(excess(&a, &c), Err(Error::GridMismatch)));
    }

    #[test]
    fn band_marks_cells_near_changes() {
        let g = line(0.0, 1.0, 0.1);
        let r = GridRegion::from_predicate(g, |p| p[0] < 0.45);
        let band = r.band(0.2);
        let marked: Vec<usize> = (0..band.len()).filter(|&i| band[i]).collect();
        assert_eq!(marked, vec![3, 4, 5, 6]);
    }

    #[test]
    fn compare_ignores_bands_and_uncertain() {
        let g = line(0.0, 2.0, 0.1);
        let a = GridRegion::from_predicate(g.clone(), |p| p[0] < 1.0);
        let b = GridRegion::from_predicate(g.clone(), |p| p[0] < 1.15);
        assert!(a.compare(&b, 0.2).unwrap().agrees());
        let c = GridRegion::from_predicate(g, |p| p[0] < 1.55);
        let cmp = a.compare(&c, 0.2).unwrap();
        assert!(!cmp.agrees());
        assert_eq!(cmp.disagreements, vec![12, 13]);
    }

    #[test]
    fn components_and_summary_2d() {
        let bbox = Aabb::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let g = Grid::covering(&bbox, 0.1).unwrap();
        let r = GridRegion::from_predicate(g, |p| {
            (p[0] < 0.25 && p[1] < 0.25) || (p[0] > 0.75 && p[1] > 0.75)
        });
        let s = r.summary();
        assert_eq!(s.components.len(), 2);
        assert_eq!(s.components[0].cells, 9);
        assert_eq!(s.in_cells, 18);
        assert!((s.measure - 0.18).abs() < 1e-12);
        let csv = r.to_csv_string();
        assert!(csv.starts_with("x,y,label\n0,0,in\n0,0.1,in\n"));
    }

    #[test]
    fn row_major_indexing_round_trips() {
        let bbox = Aabb::new(vec![-1.0, 0.0], vec![1.0, 0.5]).unwrap();
        let g = Grid::covering(&bbox, 0.25).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.index(&g.coords(i)), i);
            assert_eq!(g.locate(&g.center(i)), Some(i));
        }
    }
}
