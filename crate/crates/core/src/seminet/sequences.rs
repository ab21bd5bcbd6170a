use crate::error::{Error, Result};
use crate::par::Exec;

use super::nets::greedy_cover;
use super::space::Semimetric;

/// Result of [`cauchy_subsequence`]: `indices[k - 1]` was chosen at level
/// `k`, inside the closed ball `B_k` of radius `2^-k` around `centers[k - 1]`.
/// All later choices lie in `B_k` as well.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyExtraction {
    pub indices: Vec<usize>,
    pub centers: Vec<usize>,
    pub requested: usize,
}

impl CauchyExtraction {
    /// Number of levels reached; less than `requested` when the sequence ran out.
    pub fn depth(&self) -> usize {
        self.indices.len()
    }
}

/// Extract a Cauchy subsequence from the sequence `x_0, x_1, ...` of the
/// points of `x` by nested balls of radius `2^-k`.
///
/// At level `k` the remaining candidates are covered by `2^-k`-balls, the
/// ball holding the most candidates is kept (first center on ties), and the
/// earliest candidate after the previous choice is selected.
pub fn cauchy_subsequence<S: Semimetric + ?Sized>(
    x: &S,
    max_depth: usize,
) -> Result<CauchyExtraction> {
    cauchy_subsequence_with(x, max_depth, Exec::default())
}

pub fn cauchy_subsequence_with<S: Semimetric + ?Sized>(
    x: &S,
    max_depth: usize,
    exec: Exec,
) -> Result<CauchyExtraction> {
    if x.len() < 2 {
        return Err(Error::InvalidParameter(
            "sequence needs at least two points".into(),
        ));
    }
    let mut candidates: Vec<usize> = (0..x.len()).collect();
    let mut out = CauchyExtraction {
        indices: Vec::new(),
        centers: Vec::new(),
        requested: max_depth,
    };
    for k in 1..=max_depth {
        if candidates.is_empty() {
            break;
        }
        let r = (-(k as f64)).exp2();
        let centers = greedy_cover(x, candidates.clone(), r, exec);
        let counts = exec.map(centers.len(), |i| {
            candidates
                .iter()
                .filter(|&&p| x.dist(centers[i], p) <= r)
                .count()
        });
        let mut best = 0;
        for i in 1..centers.len() {
            if counts[i] > counts[best] {
                best = i;
            }
        }
        let c = centers[best];
        candidates.retain(|&p| x.dist(c, p) <= r);
        let chosen = candidates[0];
        out.indices.push(chosen);
        out.centers.push(c);
        candidates.remove(0);
    }
    Ok(out)
}

/// `max_N (max_{p,q >= N} d(x_{n_p}, x_{n_q}) - 2 * 2^-N)`; nonpositive when
/// every tail obeys its diameter bound.
pub fn cauchy_tail_excess<S: Semimetric + ?Sized>(x: &S, e: &CauchyExtraction) -> f64 {
    let idx = &e.indices;
    let mut worst = f64::NEG_INFINITY;
    // tail diameters, accumulated from the end
    let mut diam: f64 = 0.0;
    for start in (0..idx.len()).rev() {
        for &q in &idx[start..] {
            diam = diam.max(x.dist(idx[start], q));
        }
        let level = start + 1;
        worst = worst.max(diam - 2.0 * (-(level as f64)).exp2());
    }
    worst
}

/// Choose columns along which every row is `tol`-Cauchy.
///
/// Rows are processed in order. For each row, the values at the surviving
/// columns are sorted and split at gaps larger than `tol`; a cluster wider
/// than `tol` is narrowed to its most populated window of width `tol`. The
/// largest cluster survives, ties going to the one containing the lowest
/// column index.
pub fn diag_subsequence(values: &[Vec<f64>], tol: f64) -> Result<Vec<usize>> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be nonnegative, got {tol}"
        )));
    }
    let cols = values.first().map_or(0, Vec::len);
    if values.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidParameter(
            "rows have different lengths".into(),
        ));
    }
    let mut alive: Vec<usize> = (0..cols).collect();
    if cols == 0 && !values.is_empty() {
        return Err(Error::Empty("columns"));
    }
    for (row, r) in values.iter().enumerate() {
        if let Some(c) = alive.iter().find(|&&c| !r[c].is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "row {row}, column {c} is not finite"
            )));
        }
        let mut pts: Vec<(f64, usize)> = alive.iter().map(|&c| (r[c], c)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut best: Vec<usize> = Vec::new();
        let mut start = 0;
        for i in 1..=pts.len() {
            if i == pts.len() || pts[i].0 - pts[i - 1].0 > tol {
                let cluster = narrow(&pts[start..i], tol);
                if better(&cluster, &best) {
                    best = cluster;
                }
                start = i;
            }
        }
        if best.len() < 2 && alive.len() >= 2 {
            let oscillation = pts
                .windows(2)
                .map(|w| w[1].0 - w[0].0)
                .fold(f64::INFINITY, f64::min);
            return Err(Error::InsufficientColumns { row, oscillation });
        }
        best.sort_unstable();
        alive = best;
    }
    Ok(alive)
}

fn better(a: &[usize], b: &[usize]) -> bool {
    let lowest = |s: &[usize]| s.iter().copied().min().unwrap_or(usize::MAX);
    a.len() > b.len() || (a.len() == b.len() && lowest(a) < lowest(b))
}

/// Columns of the best width-`tol` window of a value-sorted cluster.
fn narrow(cluster: &[(f64, usize)], tol: f64) -> Vec<usize> {
    let spread = cluster.last().map_or(0.0, |l| l.0) - cluster.first().map_or(0.0, |f| f.0);
    if spread <= tol {
        return cluster.iter().map(|p| p.1).collect();
    }
    let mut best: Vec<usize> = Vec::new();
    let mut hi = 0;
    for lo in 0..cluster.len() {
        hi = hi.max(lo);
        while hi + 1 < cluster.len() && cluster[hi + 1].0 - cluster[lo].0 <= tol {
            hi += 1;
        }
        let window: Vec<usize> = cluster[lo..=hi].iter().map(|p| p.1).collect();
        if better(&window, &best) {
            best = window;
        }
    }
    best
}
