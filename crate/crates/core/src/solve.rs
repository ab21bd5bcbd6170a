//! Optimization-backed evaluations: sum norms, Calderón products and the
//! general associate-norm solver.
//!
//! Each routine solves a conic program and then re-evaluates the returned
//! certificate with exact norm evaluations, so the reported value is an
//! attained bound (an upper bound for the infima, a lower bound for the
//! supremum) rather than the raw interior-point objective.

use crate::conic::{epigraph, Affine, Model, Solution};
use clarabel::solver::SolverStatus;

use crate::error::{Error, Result};
use crate::norm::{LatticeNorm, Mask};

/// Optimal pointwise split `a <= a0 + a1` for a sum norm.
#[derive(Debug, Clone)]
pub struct SumSplit {
    pub value: f64,
    pub part0: Vec<f64>,
    pub part1: Vec<f64>,
    /// Lower bound from the dual certificate.
    pub lower: f64,
}

/// Factorization `a <= value * f0^(1-theta) * f1^theta` with `|f_j|_j <= 1`.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub value: f64,
    pub f0: Vec<f64>,
    pub f1: Vec<f64>,
    pub lower: f64,
}

/// A maximizer of the associate-norm problem.
#[derive(Debug, Clone)]
pub struct DualMaximizer {
    pub value: f64,
    /// Nonnegative maximizer in the unit ball (`|g|_X <= 1`).
    pub g: Vec<f64>,
    /// Upper bound from the dual certificate.
    pub upper: f64,
}

fn failure(context: &str, sol: &Solution, minimize: bool) -> Error {
    let (lower, upper) = if minimize {
        (sol.dual, sol.primal)
    } else {
        (-sol.primal, -sol.dual)
    };
    Error::SolverFailure {
        context: format!("{context} ({:?})", sol.status),
        lower: if lower.is_finite() { lower } else { 0.0 },
        upper: if upper.is_finite() {
            upper
        } else {
            f64::INFINITY
        },
    }
}

fn scaled(e: Error, s: f64) -> Error {
    match e {
        Error::SolverFailure {
            context,
            lower,
            upper,
        } => Error::SolverFailure {
            context,
            lower: lower * s,
            upper: upper * s,
        },
        other => other,
    }
}

/// Sum norm of moduli `a`, which must vanish off `mask` (the union mask).
///
/// Lattice structure means an optimal split can be taken pointwise with
/// aligned phases, `|f_0| + |f_1| = |f|`, so only moduli are split. The split
/// is solved jointly for all atoms as one conic program.
pub fn sum_norm(x0: &LatticeNorm, x1: &LatticeNorm, mask: &Mask, a: &[f64]) -> Result<SumSplit> {
    let n = a.len();
    let (m0, m1) = (x0.mask(), x1.mask());
    // Split fractions `a_k = a_k s_k + a_k (1 - s_k)` with `s_k` in [0, 1],
    // after scaling `a` to unit maximum; see `calderon_factorize`.
    let scale = a.iter().fold(0.0, |m: f64, &v| m.max(v));
    let mut model = Model::new();
    let mut share = Vec::with_capacity(n);
    let mut v0 = Vec::with_capacity(n);
    let mut v1 = Vec::with_capacity(n);
    for (k, &ak) in a.iter().enumerate() {
        if ak == 0.0 || !mask.contains(k) {
            share.push(Affine::constant(0.0));
            v0.push(Affine::constant(0.0));
            v1.push(Affine::constant(0.0));
            continue;
        }
        let bk = ak / scale;
        if m0.contains(k) != m1.contains(k) {
            // nothing to split: the whole atom goes to the end that admits it
            let s = Affine::constant(if m0.contains(k) { 1.0 } else { 0.0 });
            v0.push(s.scaled(bk));
            v1.push(Affine::constant(bk).plus(&s, -bk));
            share.push(s);
            continue;
        }
        let s = model.nonneg_var();
        model.geq0(Affine::constant(1.0).plus(&s, -1.0));
        v0.push(s.scaled(bk));
        v1.push(Affine::constant(bk).plus(&s, -bk));
        share.push(s);
    }
    let t0 = model.nonneg_var();
    let t1 = model.nonneg_var();
    epigraph(&mut model, x0, &v0, &t0);
    epigraph(&mut model, x1, &v1, &t1);
    let sol = model.minimize(&t0.plus(&t1, 1.0));
    if !sol.converged() {
        return Err(scaled(failure("sum-norm split", &sol, true), scale));
    }

    let mut part0 = vec![0.0; n];
    let mut part1 = vec![0.0; n];
    for k in 0..n {
        let ak = a[k];
        if ak == 0.0 {
            continue;
        }
        let p0 = match (m0.contains(k), m1.contains(k)) {
            (true, false) => ak,
            (false, _) => 0.0,
            (true, true) => ak * sol.value(&share[k]).clamp(0.0, 1.0),
        };
        part0[k] = p0;
        part1[k] = ak - p0;
    }
    let value = x0.eval_moduli(&part0)? + x1.eval_moduli(&part1)?;
    let value = if value.is_finite() {
        value
    } else {
        scale * sol.primal
    };
    Ok(SumSplit {
        value,
        part0,
        part1,
        lower: (scale * sol.dual).min(value),
    })
}

/// Calderón product norm of moduli `a` by direct minimization of `t` over
/// `a <= F0^(1-theta) F1^theta`, `N_j(F_j) <= t`. In logarithmic
/// coordinates this is a jointly convex problem; the power cones encode it
/// without the change of variables.
pub fn calderon_factorize(
    x0: &LatticeNorm,
    x1: &LatticeNorm,
    theta: f64,
    a: &[f64],
) -> Result<Factorization> {
    let n = a.len();
    let joint = x0.mask().intersect(x1.mask());
    if a.iter()
        .enumerate()
        .any(|(k, &v)| v != 0.0 && !joint.contains(k))
    {
        return Ok(Factorization {
            value: f64::INFINITY,
            f0: vec![0.0; n],
            f1: vec![0.0; n],
            lower: f64::INFINITY,
        });
    }
    if a.iter().all(|&v| v == 0.0) {
        return Ok(Factorization {
            value: 0.0,
            f0: vec![0.0; n],
            f1: vec![0.0; n],
            lower: 0.0,
        });
    }
    let first = factorize_once(x0, x1, theta, a, Variables::Absolute);
    if let Ok(f) = &first {
        if f.value - f.lower <= CERTIFIED_GAP * f.value {
            return first;
        }
    }
    let second = factorize_once(x0, x1, theta, a, Variables::Relative);
    match (first, second) {
        (Ok(p), Ok(q)) => Ok(if q.value < p.value {
            Factorization {
                lower: q.lower.max(p.lower).min(q.value),
                ..q
            }
        } else {
            Factorization {
                lower: p.lower.max(q.lower).min(p.value),
                ..p
            }
        }),
        (Ok(p), Err(_)) => Ok(p),
        (Err(_), Ok(q)) => Ok(q),
        (Err(e), Err(_)) => Err(e),
    }
}

/// Relative gap between an attained value and its dual bound below which a
/// solve is accepted without trying the other formulation.
const CERTIFIED_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Variables {
    /// The factors themselves.
    Absolute,
    /// Factors relative to `a`, `F_jk = a_k G_jk`, so the pointwise
    /// constraint reads `G0^(1-theta) G1^theta >= 1`. Better conditioned when
    /// the entries of `a` span many orders of magnitude, worse when the
    /// optimal factors are far from proportional to `a`.
    Relative,
}

fn factorize_once(
    x0: &LatticeNorm,
    x1: &LatticeNorm,
    theta: f64,
    a: &[f64],
    vars: Variables,
) -> Result<Factorization> {
    let n = a.len();
    let scale = a.iter().fold(0.0, |m: f64, &v| m.max(v));
    let b: Vec<f64> = a.iter().map(|v| v / scale).collect();
    let mut model = Model::new();
    let t = model.nonneg_var();
    let mut f0 = Vec::with_capacity(n);
    let mut f1 = Vec::with_capacity(n);
    for &bk in &b {
        if bk == 0.0 {
            f0.push(Affine::constant(0.0));
            f1.push(Affine::constant(0.0));
            continue;
        }
        let u = model.nonneg_var();
        let v = model.nonneg_var();
        match vars {
            Variables::Absolute => {
                model.power(1.0 - theta, u.clone(), v.clone(), Affine::constant(bk));
                f0.push(u);
                f1.push(v);
            }
            Variables::Relative => {
                model.power(1.0 - theta, u.clone(), v.clone(), Affine::constant(1.0));
                f0.push(u.scaled(bk));
                f1.push(v.scaled(bk));
            }
        }
    }
    epigraph(&mut model, x0, &f0, &t);
    epigraph(&mut model, x1, &f1, &t);
    let sol = model.minimize(&t);
    if !sol.converged() {
        return Err(scaled(failure("Calderón factorization", &sol, true), scale));
    }

    let g0: Vec<f64> = f0.iter().map(|e| scale * sol.value(e).max(0.0)).collect();
    let g1: Vec<f64> = f1.iter().map(|e| scale * sol.value(e).max(0.0)).collect();
    // The interior-point factors may fall slightly short of `a` pointwise;
    // mostly at small atoms. Three repairs are tried, each scaling up only
    // the short atoms: the first factor alone, the second alone, or both.
    // Which one is cheap depends on the endpoints (raising an l^inf factor
    // at an atom where it is already maximal costs the full deficit).
    let mut best: Option<(f64, Vec<f64>, Vec<f64>, f64, f64)> = None;
    for repair in [Repair::First, Repair::Second, Repair::Both] {
        let (r0, r1) = repair_factors(&g0, &g1, a, theta, repair);
        let n0 = x0.eval_moduli(&r0)?;
        let n1 = x1.eval_moduli(&r1)?;
        let value = n0.powf(1.0 - theta) * n1.powf(theta);
        if value.is_finite() && n0 > 0.0 && n1 > 0.0 && best.as_ref().is_none_or(|b| value < b.0) {
            best = Some((value, r0, r1, n0, n1));
        }
    }
    let Some((value, g0, g1, n0, n1)) = best else {
        return Err(scaled(
            failure("Calderón factorization refinement", &sol, true),
            scale,
        ));
    };
    let lower = if sol.status == SolverStatus::Solved {
        (scale * sol.dual).min(value)
    } else {
        0.0
    };
    Ok(Factorization {
        value,
        f0: g0.iter().map(|v| v / n0).collect(),
        f1: g1.iter().map(|v| v / n1).collect(),
        lower,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Repair {
    First,
    Second,
    Both,
}

fn repair_factors(
    g0: &[f64],
    g1: &[f64],
    a: &[f64],
    theta: f64,
    repair: Repair,
) -> (Vec<f64>, Vec<f64>) {
    let mut r0 = g0.to_vec();
    let mut r1 = g1.to_vec();
    for k in 0..a.len() {
        if a[k] == 0.0 {
            continue;
        }
        let prod = r0[k].powf(1.0 - theta) * r1[k].powf(theta);
        if !(prod > 0.0) {
            r0[k] = r0[k].max(a[k]);
            r1[k] = r1[k].max(a[k]);
            let prod = r0[k].powf(1.0 - theta) * r1[k].powf(theta);
            let r = (a[k] / prod).max(1.0);
            r0[k] *= r;
            r1[k] *= r;
            continue;
        }
        if prod >= a[k] {
            continue;
        }
        let r = a[k] / prod;
        match repair {
            Repair::First => r0[k] *= r.powf(1.0 / (1.0 - theta)),
            Repair::Second => r1[k] *= r.powf(1.0 / theta),
            Repair::Both => {
                r0[k] *= r;
                r1[k] *= r;
            }
        }
        // guard against rounding in the fractional powers
        let prod = r0[k].powf(1.0 - theta) * r1[k].powf(theta);
        if prod < a[k] {
            let r = a[k] / prod;
            r0[k] *= r;
            r1[k] *= r;
        }
    }
    (r0, r1)
}

/// General associate-norm solver: maximize `sum_k a_k mu_k g_k` over the
/// nonnegative part of the unit ball of `x`. `a` must vanish off the mask.
pub fn associate_maximize(x: &LatticeNorm, a: &[f64]) -> Result<DualMaximizer> {
    let n = a.len();
    let mask = x.mask();
    let mu = x.space().weights();
    let mut model = Model::new();
    // atoms with no objective weight stay at zero: the ball is solid, and a
    // variable pinned to zero inside a power cone stalls the solver
    let g: Vec<Affine> = (0..n)
        .map(|k| {
            if mask.contains(k) && a[k] != 0.0 {
                model.nonneg_var()
            } else {
                Affine::constant(0.0)
            }
        })
        .collect();
    epigraph(&mut model, x, &g, &Affine::constant(1.0));
    let mut objective = Affine::default();
    for k in 0..n {
        if mask.contains(k) && a[k] != 0.0 {
            objective.add(&g[k], -a[k] * mu[k]);
        }
    }
    let sol = model.minimize(&objective);
    if !sol.converged() {
        return Err(failure("associate-norm maximization", &sol, false));
    }

    let gv: Vec<f64> = (0..n)
        .map(|k| {
            if g[k].is_zero() {
                0.0
            } else {
                sol.value(&g[k]).max(0.0)
            }
        })
        .collect();
    let ng = x.eval_moduli(&gv)?;
    let pairing: f64 = (0..n).map(|k| a[k] * gv[k] * mu[k]).sum();
    let (value, g) = if ng > 0.0 && ng.is_finite() {
        (pairing / ng, gv.iter().map(|v| v / ng).collect())
    } else {
        (-sol.primal, gv)
    };
    Ok(DualMaximizer {
        value,
        g,
        upper: (-sol.dual).max(value),
    })
}
