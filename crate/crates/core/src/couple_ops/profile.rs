use serde::Serialize;

use crate::calderon::CoupleSpec;
use crate::error::{Error, Result};
use crate::measure::LatticeVector;
use crate::norm::{check_theta, LatticeNorm};
use crate::par::Exec;
use crate::sampling::{sample_sphere, SamplerConfig};
use crate::seminet::{greedy_cover, uncovered_point, Semimetric, SemimetricSpace};

use super::operator::{endpoint_norm, Matrix, OperatorOnCouple};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub eps: f64,
    /// Size of the greedy net at this `eps`.
    pub greedy: usize,
    /// Smallest verified net size: the greedy size, or a net found for a
    /// smaller `eps` (or a larger truncation) when that is smaller.
    pub covering_number: usize,
}

/// Covering numbers of `T(B)` for the unit sphere `B` of `G_theta`,
/// measured in `X_theta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringCurve {
    pub theta: f64,
    pub points: Vec<CurvePoint>,
    pub sample_count: usize,
    pub seed: u64,
    /// Largest sampled distance in the image.
    pub image_diameter: f64,
}

impl CoveringCurve {
    /// Whether the covering numbers never increase with `eps`.
    pub fn nonincreasing(&self) -> bool {
        // the grid is descending in eps, so counts must not decrease along it
        self.points
            .windows(2)
            .all(|w| w[0].covering_number <= w[1].covering_number)
    }
}

fn check_grid(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::InvalidParameter("eps grid is empty".into()));
    }
    if let Some(e) = eps.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "eps grid must be positive, got {e}"
        )));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "eps grid must be strictly descending".into(),
        ));
    }
    Ok(())
}

struct Sampled {
    samples: Vec<LatticeVector>,
    x_theta: LatticeNorm,
}

fn sample_source(
    g: &CoupleSpec,
    x: &CoupleSpec,
    theta: f64,
    cfg: SamplerConfig,
    exec: Exec,
) -> Result<Sampled> {
    check_theta(theta)?;
    let g_theta = g.theta_norm(theta)?;
    let samples = sample_sphere(g_theta.fast(), cfg, exec)?;
    let x_theta = x.theta_norm(theta)?.fast().clone();
    Ok(Sampled { samples, x_theta })
}

fn image_distances(t: &Matrix, s: &Sampled, exec: Exec) -> Result<SemimetricSpace> {
    let images: Vec<Vec<_>> = exec.map(s.samples.len(), |i| t.apply(s.samples[i].as_slice()));
    let n = images.len();
    let rows = exec.try_map(n, |i| {
        (i + 1..n)
            .map(|j| {
                let diff: Vec<f64> = images[i]
                    .iter()
                    .zip(&images[j])
                    .map(|(a, b)| (a - b).norm())
                    .collect();
                s.x_theta.eval_moduli(&diff)
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let mut d = vec![0.0; n * n];
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            if !v.is_finite() {
                return Err(Error::PreconditionViolation(format!(
                    "image distance between samples {i} and {j} is infinite"
                )));
            }
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    SemimetricSpace::from_table(n, d)
}

/// Greedy nets of `d` at each eps, as candidate nets.
fn greedy_nets(d: &SemimetricSpace, eps: &[f64], exec: Exec) -> Vec<Vec<usize>> {
    eps.iter()
        .map(|&e| greedy_cover(d, (0..d.len()).collect(), e, exec))
        .collect()
}

/// For each eps (descending), the smallest of the candidate nets that
/// covers at that eps; the net chosen at a smaller eps is a candidate for
/// every larger one.
fn settle(
    d: &SemimetricSpace,
    eps: &[f64],
    greedy: &[Vec<usize>],
    extra: Option<&[Vec<usize>]>,
    exec: Exec,
) -> Vec<Vec<usize>> {
    let mut best: Vec<Vec<usize>> = vec![Vec::new(); eps.len()];
    for i in (0..eps.len()).rev() {
        let mut pick = greedy[i].clone();
        let mut candidates: Vec<&Vec<usize>> = Vec::new();
        if i + 1 < eps.len() {
            candidates.push(&best[i + 1]);
        }
        if let Some(extra) = extra {
            candidates.push(&extra[i]);
        }
        for c in candidates {
            if c.len() < pick.len() && uncovered_point(d, c, eps[i], exec).is_none() {
                pick = c.clone();
            }
        }
        best[i] = pick;
    }
    best
}

fn curve(
    theta: f64,
    eps: &[f64],
    greedy: &[Vec<usize>],
    best: &[Vec<usize>],
    cfg: SamplerConfig,
    d: &SemimetricSpace,
) -> CoveringCurve {
    CoveringCurve {
        theta,
        points: eps
            .iter()
            .zip(greedy)
            .zip(best)
            .map(|((&eps, g), b)| CurvePoint {
                eps,
                greedy: g.len(),
                covering_number: b.len(),
            })
            .collect(),
        sample_count: cfg.count,
        seed: cfg.seed,
        image_diameter: d.diameter(),
    }
}

/// Covering numbers of the image of the `G_theta` unit sphere under `T`,
/// measured in `X_theta`, for each `eps` of a positive descending grid.
pub fn compactness_profile(
    t: &OperatorOnCouple,
    theta: f64,
    eps: &[f64],
    cfg: SamplerConfig,
) -> Result<CoveringCurve> {
    compactness_profile_with(t, theta, eps, cfg, Exec::default())
}

pub fn compactness_profile_with(
    t: &OperatorOnCouple,
    theta: f64,
    eps: &[f64],
    cfg: SamplerConfig,
    exec: Exec,
) -> Result<CoveringCurve> {
    check_grid(eps)?;
    let s = sample_source(t.source(), t.target(), theta, cfg, exec)?;
    let d = image_distances(t.matrix(), &s, exec)?;
    let greedy = greedy_nets(&d, eps, exec);
    let best = settle(&d, eps, &greedy, None, exec);
    let c = curve(theta, eps, &greedy, &best, cfg, &d);
    if !c.nonincreasing() {
        return Err(Error::CheckFailed(format!(
            "covering curve at theta {theta} increases with eps"
        )));
    }
    Ok(c)
}

/// Profiles of the truncations `diag(sigma_0, ..., sigma_{m-1}, 0, ...)`
/// for `m = 1..=n`, all on one sample set.
///
/// Truncating can only shrink image distances, so a net of the `m + 1`
/// image is a net of the `m` image; such nets are reused when smaller (after
/// checking that they cover). The curves are then nonincreasing in `eps`
/// and nondecreasing in `m`, and both properties are checked.
pub fn truncation_family(
    t: &OperatorOnCouple,
    theta: f64,
    eps: &[f64],
    cfg: SamplerConfig,
) -> Result<Vec<CoveringCurve>> {
    truncation_family_with(t, theta, eps, cfg, Exec::default())
}

pub fn truncation_family_with(
    t: &OperatorOnCouple,
    theta: f64,
    eps: &[f64],
    cfg: SamplerConfig,
    exec: Exec,
) -> Result<Vec<CoveringCurve>> {
    check_grid(eps)?;
    let sigma = match t.matrix() {
        Matrix::Diagonal(d) => d.clone(),
        Matrix::Dense { .. } => {
            return Err(Error::InvalidParameter(
                "truncation family needs a diagonal operator".into(),
            ));
        }
    };
    let n = sigma.len();
    let s = sample_source(t.source(), t.target(), theta, cfg, exec)?;
    let mut curves = vec![None; n];
    let mut above: Option<Vec<Vec<usize>>> = None;
    for m in (1..=n).rev() {
        let mut trunc = sigma.clone();
        for v in trunc.iter_mut().skip(m) {
            *v = num_complex::Complex64::new(0.0, 0.0);
        }
        let d = image_distances(&Matrix::Diagonal(trunc), &s, exec)?;
        let greedy = greedy_nets(&d, eps, exec);
        let best = settle(&d, eps, &greedy, above.as_deref(), exec);
        curves[m - 1] = Some(curve(theta, eps, &greedy, &best, cfg, &d));
        above = Some(best);
    }
    let curves: Vec<CoveringCurve> = curves
        .into_iter()
        .map(|c| c.expect("every truncation computed"))
        .collect();
    for (m, c) in curves.iter().enumerate() {
        if !c.nonincreasing() {
            return Err(Error::CheckFailed(format!(
                "truncation {} increases with eps",
                m + 1
            )));
        }
        if let Some(next) = curves.get(m + 1) {
            if c.points
                .iter()
                .zip(&next.points)
                .any(|(a, b)| a.covering_number > b.covering_number)
            {
                return Err(Error::CheckFailed(format!(
                    "truncation {} exceeds truncation {}",
                    m + 1,
                    m + 2
                )));
            }
        }
    }
    Ok(curves)
}

/// `max ||Tx||_theta / ||x||_theta` over the samples, checked against
/// `|T|_0^(1-theta) |T|_1^theta`. Refuses operators whose endpoint norms are
/// only estimated.
pub fn interp_bound_check(
    t: &OperatorOnCouple,
    theta: f64,
    samples: &[LatticeVector],
) -> Result<InterpBound> {
    check_theta(theta)?;
    let e0 = endpoint_norm(t, 0)?;
    let e1 = endpoint_norm(t, 1)?;
    if !(e0.exact && e1.exact) {
        return Err(Error::PreconditionViolation(
            "endpoint norms are lower bounds only; no valid upper bound".into(),
        ));
    }
    let bound = e0.value.powf(1.0 - theta) * e1.value.powf(theta);
    let g_theta = t.source().theta_norm(theta)?;
    let x_theta = t.target().theta_norm(theta)?;
    let ratios = Exec::default().try_map(samples.len(), |i| {
        let x = &samples[i];
        let nx = g_theta.eval(x)?;
        if !(nx > 0.0 && nx.is_finite()) {
            return Ok(0.0);
        }
        Ok::<f64, Error>(x_theta.eval(&t.apply(x)?)? / nx)
    })?;
    let worst = ratios.into_iter().fold(0.0, f64::max);
    if worst > bound + 1e-7 {
        return Err(Error::CheckFailed(format!(
            "interpolated norm ratio {worst} exceeds the bound {bound}"
        )));
    }
    Ok(InterpBound { worst, bound })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpBound {
    pub worst: f64,
    pub bound: f64,
}
