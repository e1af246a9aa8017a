//! Minimal enclosing ball by Welzl's recursion with the move-to-front heuristic.

use super::{dist2, point_set_dim, Ball};
use crate::error::Result;

/// Relative slack on squared radii when testing containment during the recursion.
const SLACK: f64 = 1e-12;

/// Smallest closed ball containing every point.
///
/// Points are sorted lexicographically and deduplicated first, so the result
/// does not depend on input order.
pub fn minimal_enclosing_ball(points: &[Vec<f64>]) -> Result<Ball> {
    let k = point_set_dim(points)?;
    let mut pts: Vec<Vec<f64>> = points.to_vec();
    pts.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    pts.dedup();

    let mut solver = Welzl { k, pts };
    let mut support = Vec::with_capacity(k + 1);
    let n = solver.pts.len();
    let mut ball = solver.mtf(n, &mut support);
    // Near-degenerate supports can leave a point marginally outside; re-run
    // with the offenders moved to the front.
    for _ in 0..4 {
        let Some(i) = solver.pts.iter().position(|p| !ball.holds(p, 1e-9)) else {
            break;
        };
        let p = solver.pts.remove(i);
        solver.pts.insert(0, p);
        ball = solver.mtf(n, &mut support);
    }
    Ok(Ball::closed(ball.center, ball.r2.max(0.0).sqrt()))
}

#[derive(Clone)]
struct Candidate {
    center: Vec<f64>,
    /// Negative for the empty ball.
    r2: f64,
}

impl Candidate {
    fn holds(&self, p: &[f64], abs: f64) -> bool {
        if self.r2 < 0.0 {
            return false;
        }
        let r = self.r2.sqrt() + abs;
        dist2(&self.center, p) <= r * r
    }

    fn holds_relaxed(&self, p: &[f64]) -> bool {
        self.r2 >= 0.0 && dist2(&self.center, p) <= self.r2 * (1.0 + SLACK) + 1e-24
    }
}

struct Welzl {
    k: usize,
    pts: Vec<Vec<f64>>,
}

impl Welzl {
    /// Ball of `pts[..end]` with `support` on its boundary.
    fn mtf(&mut self, end: usize, support: &mut Vec<Vec<f64>>) -> Candidate {
        let mut ball = circumball(support, self.k);
        if support.len() == self.k + 1 {
            return ball;
        }
        for i in 0..end {
            if ball.holds_relaxed(&self.pts[i]) {
                continue;
            }
            support.push(self.pts[i].clone());
            ball = self.mtf(i, support);
            support.pop();
            let p = self.pts.remove(i);
            self.pts.insert(0, p);
        }
        ball
    }
}

/// Smallest ball with every support point on its boundary, or a
/// best-effort enclosing ball when the support is affinely dependent.
fn circumball(support: &[Vec<f64>], k: usize) -> Candidate {
    match support {
        [] => Candidate {
            center: vec![0.0; k],
            r2: -1.0,
        },
        [p] => Candidate {
            center: p.clone(),
            r2: 0.0,
        },
        [p0, rest @ ..] => {
            let v: Vec<Vec<f64>> = rest
                .iter()
                .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect())
                .collect();
            let m = v.len();
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            let gram: Vec<Vec<f64>> = (0..m)
                .map(|i| (0..m).map(|j| 2.0 * dot(&v[i], &v[j])).collect())
                .collect();
            let rhs: Vec<f64> = v.iter().map(|vi| dot(vi, vi)).collect();
            match solve(gram, rhs) {
                Some(lambda) => {
                    let mut center = p0.clone();
                    for (l, vi) in lambda.iter().zip(&v) {
                        for (c, x) in center.iter_mut().zip(vi) {
                            *c += l * x;
                        }
                    }
                    let r2 = support
                        .iter()
                        .map(|p| dist2(&center, p))
                        .fold(0.0, f64::max);
                    Candidate { center, r2 }
                }
                None => enclosing_fallback(support),
            }
        }
    }
}

/// For affinely dependent supports: the smallest ball through some
/// independent subset that still encloses all support points.
fn enclosing_fallback(support: &[Vec<f64>]) -> Candidate {
    let k = support[0].len();
    let m = support.len();
    let mut best: Option<Candidate> = None;
    for mask in 1u32..(1 << m) {
        let subset: Vec<Vec<f64>> = (0..m)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| support[i].clone())
            .collect();
        if subset.len() == m {
            continue;
        }
        let c = circumball(&subset, k);
        if support.iter().all(|p| c.holds_relaxed(p))
            && best.as_ref().map_or(true, |b| c.r2 < b.r2)
        {
            best = Some(c);
        }
    }
    best.expect("a proper subset of a dependent support always encloses it")
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}
