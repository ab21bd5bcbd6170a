use crate::associate::{associate_norm, norming_functional};
use crate::calderon::closed_lp;
use crate::error::{ensure_dim, Error, Result};
use crate::measure::LatticeVector;
use crate::norm::LatticeNorm;
use crate::par::Exec;
use crate::sampling::{sample_sphere_with, SamplerConfig};
use crate::seminet::BilinearSystem;

use super::operator::OperatorOnCouple;

/// Allowed negative slack in the bound checks.
pub const BOUND_SLACK: f64 = 1e-9;

/// The norm whose unit sphere supplies the `g` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GBall {
    /// `G_j`, restricted to the support of `G_0 ∩ G_1`.
    Endpoint(usize),
    Intersection,
    /// `G_0^(1-theta) G_1^theta`.
    Theta(f64),
}

/// The norm whose unit sphere supplies the `z` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZBall {
    /// `X_j'`.
    Endpoint(usize),
    /// `X_0' + X_1'`.
    Sum,
    /// `X_0'^(1-theta) X_1'^theta`.
    Theta(f64),
}

impl GBall {
    pub fn norm(self, t: &OperatorOnCouple) -> Result<LatticeNorm> {
        let g = t.source();
        match self {
            GBall::Endpoint(j) if j < 2 => g.endpoint(j).clone().with_mask(g.joint_mask()),
            GBall::Endpoint(j) => Err(Error::InvalidParameter(format!(
                "endpoint index must be 0 or 1, got {j}"
            ))),
            GBall::Intersection => Ok(g.intersection()),
            GBall::Theta(theta) => Ok(g.theta_norm(theta)?.fast().clone()),
        }
    }
}

impl ZBall {
    pub fn norm(self, t: &OperatorOnCouple) -> Result<LatticeNorm> {
        let a = t.target().associates();
        match self {
            ZBall::Endpoint(j) if j < 2 => Ok(explicit(a.endpoint(j))),
            ZBall::Endpoint(j) => Err(Error::InvalidParameter(format!(
                "endpoint index must be 0 or 1, got {j}"
            ))),
            ZBall::Sum => LatticeNorm::sum(explicit(a.x0()), explicit(a.x1())),
            ZBall::Theta(theta) => Ok(a.theta_norm(theta)?.fast().clone()),
        }
    }
}

/// The closed-form weighted `l^p` equal to `x`, when there is one.
fn explicit(x: &LatticeNorm) -> LatticeNorm {
    match closed_lp(x) {
        Some((p, w, mask)) => LatticeNorm::weighted_lp(x.space().clone(), p, w)
            .and_then(|n| n.with_mask(mask))
            .unwrap_or_else(|_| x.clone()),
        None => x.clone(),
    }
}

/// Sampled points `g`, `z` and the table `h(g, z) = sum_i z_i (Tg)_i nu_i`.
#[derive(Debug, Clone)]
pub struct AdjointSystem {
    pub g: Vec<LatticeVector>,
    pub z: Vec<LatticeVector>,
    pub g_norm: LatticeNorm,
    pub z_norm: LatticeNorm,
    pub system: BilinearSystem,
}

/// Sample both unit spheres and tabulate `h`.
///
/// The `z` sample contains, after the phased basis vectors, functionals
/// attaining `|Tg|` for the first `g` points when `ZBall` is an endpoint.
pub fn build_adjoint_system(
    t: &OperatorOnCouple,
    ball_g: GBall,
    ball_z: ZBall,
    cfg: SamplerConfig,
) -> Result<AdjointSystem> {
    build_adjoint_system_with(t, ball_g, ball_z, cfg, Exec::default())
}

pub fn build_adjoint_system_with(
    t: &OperatorOnCouple,
    ball_g: GBall,
    ball_z: ZBall,
    cfg: SamplerConfig,
    exec: Exec,
) -> Result<AdjointSystem> {
    let g_norm = ball_g.norm(t)?;
    let z_norm = ball_z.norm(t)?;
    let g = sample_sphere_with(&g_norm, cfg, exec, &[])?;
    let attaining = match ball_z {
        ZBall::Endpoint(j) => {
            let xj = explicit(t.target().endpoint(j));
            let count = (cfg.count / 8).min(g.len());
            let mut out = Vec::with_capacity(count);
            for gi in &g[..count] {
                let y = t.apply(gi)?;
                if !y.is_zero() && xj.admits(&y) {
                    out.push(norming_functional(&xj, &y)?);
                }
            }
            out
        }
        _ => Vec::new(),
    };
    let z = sample_sphere_with(
        &z_norm,
        SamplerConfig {
            seed: cfg.seed ^ 0xA5A5_A5A5,
            ..cfg
        },
        exec,
        &attaining,
    )?;
    let images = exec.try_map(g.len(), |i| t.apply(&g[i]))?;
    let nu = t.target().space();
    let rows = exec.try_map(g.len(), |i| {
        z.iter()
            .map(|zj| nu.pairing(zj, &images[i]))
            .collect::<Result<Vec<_>>>()
    })?;
    let system = BilinearSystem::from_rows(rows)?;
    Ok(AdjointSystem {
        g,
        z,
        g_norm,
        z_norm,
        system,
    })
}

/// `|z|_{X_j'} |Tg|_{X_j} - |h(g, z)|`, required to be `>= -1e-9`.
pub fn ercv_check(
    t: &OperatorOnCouple,
    g: &LatticeVector,
    z: &LatticeVector,
    j: usize,
) -> Result<f64> {
    if j > 1 {
        return Err(Error::InvalidParameter(format!(
            "endpoint index must be 0 or 1, got {j}"
        )));
    }
    let xj = t.target().endpoint(j);
    let tg = t.apply(g)?;
    ensure_dim(xj.dim(), z.len())?;
    let a = associate_norm(xj, z)?;
    let b = xj.eval(&tg)?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::PreconditionViolation("norms must be finite".into()));
    }
    let h = t.pairing(g, z)?.norm();
    require(a * b - h, "|h(g,z)| <= |z|_X' |Tg|_X")
}

/// `|z|_{X_0'+X_1'} |g|_{G_0 ∩ G_1} - |h(g, z)|` for an operator normalized
/// with exact endpoint norms; refuses estimated normalizations.
pub fn joint_bound_check(
    t: &OperatorOnCouple,
    g: &LatticeVector,
    z: &LatticeVector,
) -> Result<f64> {
    if !t.normalization_exact() {
        return Err(Error::PreconditionViolation(
            "operator must be normalized with exact endpoint norms".into(),
        ));
    }
    let zn = ZBall::Sum.norm(t)?.eval(z)?;
    let gn = t.source().intersection().eval(g)?;
    let h = t.pairing(g, z)?.norm();
    require(zn * gn - h, "|h(g,z)| <= |z|_{X0'+X1'} |g|_{G0∩G1}")
}

fn require(slack: f64, what: &str) -> Result<f64> {
    if slack >= -BOUND_SLACK {
        Ok(slack)
    } else {
        Err(Error::CheckFailed(format!("{what} violated by {}", -slack)))
    }
}

impl AdjointSystem {
    /// Smallest `|z|_{X_0'+X_1'} |g|_{G_0∩G_1} - |h(g, z)|` over all pairs.
    pub fn joint_bound_slack(&self, t: &OperatorOnCouple, exec: Exec) -> Result<f64> {
        if !t.normalization_exact() {
            return Err(Error::PreconditionViolation(
                "operator must be normalized with exact endpoint norms".into(),
            ));
        }
        let sum = ZBall::Sum.norm(t)?;
        let zn = exec.try_map(self.z.len(), |j| sum.eval(&self.z[j]))?;
        let inter = t.source().intersection();
        let gn = exec.try_map(self.g.len(), |i| inter.eval(&self.g[i]))?;
        Ok(self.worst(&gn, &zn))
    }

    /// Smallest `|z|_{X_j'} |Tg|_{X_j} - |h(g, z)|` over all pairs.
    pub fn ercv_slack(&self, t: &OperatorOnCouple, j: usize, exec: Exec) -> Result<f64> {
        let xj = t.target().endpoint(j);
        let zn = exec.try_map(self.z.len(), |k| associate_norm(xj, &self.z[k]))?;
        let tg = exec.try_map(self.g.len(), |i| xj.eval(&t.apply(&self.g[i])?))?;
        Ok(self.worst(&tg, &zn))
    }

    /// Smallest `|z|_{X_j'} - max_g |h(g, z)|`; meaningful when the `g`
    /// points are drawn from the unit sphere of `G_j` and `T` is normalized.
    pub fn contraction_slack(&self, t: &OperatorOnCouple, j: usize, exec: Exec) -> Result<f64> {
        let xj = t.target().endpoint(j);
        let zn = exec.try_map(self.z.len(), |k| associate_norm(xj, &self.z[k]))?;
        let ones = vec![1.0; self.g.len()];
        Ok(self.worst(&ones, &zn))
    }

    /// Smallest `|T(g_m - g_n)|_{X_j} - d_A(g_m, g_n)`; meaningful when the
    /// `z` points are drawn from the unit sphere of `X_j'`.
    pub fn domination_slack(&self, t: &OperatorOnCouple, j: usize, exec: Exec) -> Result<f64> {
        let xj = t.target().endpoint(j);
        let images = exec.try_map(self.g.len(), |i| t.apply(&self.g[i]))?;
        let m = self.g.len();
        let rows = exec.try_map(m, |a| {
            let mut worst = f64::INFINITY;
            for b in a + 1..m {
                let d = self.system.d_a(a, b);
                worst = worst.min(xj.eval(&(&images[a] - &images[b]))? - d);
            }
            Ok::<f64, Error>(worst)
        })?;
        Ok(rows.into_iter().fold(f64::INFINITY, f64::min))
    }

    fn worst(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut worst = f64::INFINITY;
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                worst = worst.min(ai * bj - self.system.h(i, j).norm());
            }
        }
        worst
    }
}
