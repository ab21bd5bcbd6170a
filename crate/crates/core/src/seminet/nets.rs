use crate::error::{Error, Result};
use crate::par::Exec;

use super::space::Semimetric;

/// Largest space for which [`covering_number`] runs the exact search.
pub const EXACT_COVER_LIMIT: usize = 20;

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && !r.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "radius must be positive, got {r}"
        )))
    }
}

/// Centers of closed `eps`-balls covering `x`: repeatedly take the
/// lowest-index uncovered point.
pub fn greedy_net<S: Semimetric + ?Sized>(x: &S, eps: f64) -> Result<Vec<usize>> {
    greedy_net_with(x, eps, Exec::default())
}

pub fn greedy_net_with<S: Semimetric + ?Sized>(x: &S, eps: f64, exec: Exec) -> Result<Vec<usize>> {
    check_radius(eps)?;
    Ok(greedy_cover(x, (0..x.len()).collect(), eps, exec))
}

/// Greedy cover of the listed points (ascending order is kept).
pub(crate) fn greedy_cover<S: Semimetric + ?Sized>(
    x: &S,
    mut open: Vec<usize>,
    eps: f64,
    exec: Exec,
) -> Vec<usize> {
    let mut centers = Vec::new();
    while let Some(&c) = open.first() {
        centers.push(c);
        let rest = &open[1..];
        let keep = exec.map(rest.len(), |i| x.dist(c, rest[i]) > eps);
        open = rest
            .iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(&p, _)| p)
            .collect();
    }
    centers
}

/// The first point not within `eps` of any center, if any.
pub fn uncovered_point<S: Semimetric + ?Sized>(
    x: &S,
    centers: &[usize],
    eps: f64,
    exec: Exec,
) -> Option<usize> {
    let far = exec.map(x.len(), |p| centers.iter().all(|&c| x.dist(c, p) > eps));
    far.iter().position(|&f| f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoveringNumber {
    pub greedy: usize,
    /// Minimum cover size; absent above [`EXACT_COVER_LIMIT`] points.
    pub exact: Option<usize>,
}

pub fn covering_number<S: Semimetric + ?Sized>(x: &S, eps: f64) -> Result<CoveringNumber> {
    let greedy = greedy_net(x, eps)?.len();
    let exact = exact_covering_number(x, eps)?;
    Ok(CoveringNumber { greedy, exact })
}

/// Minimum number of closed `eps`-balls centered at points of `x` that
/// cover `x`, by exhaustive search. `None` above [`EXACT_COVER_LIMIT`].
pub fn exact_covering_number<S: Semimetric + ?Sized>(x: &S, eps: f64) -> Result<Option<usize>> {
    check_radius(eps)?;
    let n = x.len();
    if n > EXACT_COVER_LIMIT {
        return Ok(None);
    }
    if n == 0 {
        return Ok(Some(0));
    }
    let balls: Vec<u32> = (0..n)
        .map(|c| {
            (0..n)
                .filter(|&p| x.dist(c, p) <= eps)
                .fold(0u32, |m, p| m | (1 << p))
        })
        .collect();
    let largest = balls.iter().map(|b| b.count_ones()).max().unwrap_or(1);
    let all = (1u32 << n) - 1;
    let upper = greedy_cover(x, (0..n).collect(), eps, Exec::Sequential).len();
    for k in 1..upper {
        if cover_within(&balls, all, k, largest) {
            return Ok(Some(k));
        }
    }
    Ok(Some(upper))
}

/// Whether `open` can be covered by at most `k` of the balls. Branches on
/// the balls containing the lowest uncovered point.
fn cover_within(balls: &[u32], open: u32, k: usize, largest: u32) -> bool {
    if open == 0 {
        return true;
    }
    if k == 0 || (k as u32) * largest < open.count_ones() {
        return false;
    }
    let p = open.trailing_zeros();
    let mut options: Vec<u32> = balls
        .iter()
        .filter(|&&b| b & (1 << p) != 0)
        .map(|&b| b & open)
        .collect();
    options.sort_unstable_by(|a, b| b.count_ones().cmp(&a.count_ones()).then(a.cmp(b)));
    options.dedup();
    let maximal: Vec<u32> = options
        .iter()
        .copied()
        .filter(|&o| !options.iter().any(|&q| q != o && q & o == o))
        .collect();
    maximal
        .into_iter()
        .any(|o| cover_within(balls, open & !o, k - 1, largest))
}

/// Scan points in ascending order, keeping each point farther than `r`
/// from every point already kept.
pub fn separated_set<S: Semimetric + ?Sized>(x: &S, r: f64) -> Result<Vec<usize>> {
    check_radius(r)?;
    let mut kept: Vec<usize> = Vec::new();
    for p in 0..x.len() {
        if kept.iter().all(|&q| x.dist(p, q) > r) {
            kept.push(p);
        }
    }
    Ok(kept)
}
