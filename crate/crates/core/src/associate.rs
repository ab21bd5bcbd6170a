//! Köthe duals (associate norms) and the checks built on them.

use num_complex::Complex64;

use crate::error::{ensure_dim, Error, Result};
use crate::measure::LatticeVector;
use crate::norm::{weighted_lp_value, Exponent, LatticeNorm, NormKind};
use crate::solve::{self, DualMaximizer};

/// Relative tolerance used by the equality checks in this module.
pub const IDENTITY_TOL: f64 = 1e-5;

/// `|f|_{X'} = sup { sum_k |f_k g_k| mu_k : |g|_X <= 1 }`.
///
/// Weighted `l^p` norms use the conjugate closed form `l^{p'}(1/w)` on the
/// same mask; every other norm goes through the general solver. Vectors
/// that are nonzero off the mask of `X` get `+inf`.
pub fn associate_norm(x: &LatticeNorm, f: &LatticeVector) -> Result<f64> {
    ensure_dim(x.dim(), f.len())?;
    associate_moduli(x, &f.moduli())
}

pub(crate) fn associate_moduli(x: &LatticeNorm, a: &[f64]) -> Result<f64> {
    if let Some(v) = trivial_value(x, a) {
        return Ok(v);
    }
    match x.kind() {
        NormKind::WeightedLp { p, w } => Ok(conjugate_lp_value(*p, w, x, a)),
        _ => solve::associate_maximize(x, a).map(|m| m.value),
    }
}

fn trivial_value(x: &LatticeNorm, a: &[f64]) -> Option<f64> {
    if a.iter()
        .enumerate()
        .any(|(k, &v)| v != 0.0 && !x.mask().contains(k))
    {
        return Some(f64::INFINITY);
    }
    if a.iter().all(|&v| v == 0.0) {
        return Some(0.0);
    }
    None
}

fn conjugate_lp_value(p: Exponent, w: &[f64], x: &LatticeNorm, a: &[f64]) -> f64 {
    let inv: Vec<f64> = w.iter().map(|v| 1.0 / v).collect();
    weighted_lp_value(p.conjugate(), &inv, x.space().weights(), x.mask(), a)
}

/// The closed-form associate norm, available only for weighted `l^p`.
pub fn associate_norm_closed_form(x: &LatticeNorm, f: &LatticeVector) -> Option<f64> {
    let (p, w) = x.as_weighted_lp()?;
    let a = f.moduli();
    if a.len() != x.dim() {
        return None;
    }
    Some(trivial_value(x, &a).unwrap_or_else(|| conjugate_lp_value(p, w, x, &a)))
}

/// Run the general solver regardless of the kind of `x`, returning the
/// maximizer as well as the value.
pub fn associate_norm_solver(x: &LatticeNorm, f: &LatticeVector) -> Result<DualMaximizer> {
    ensure_dim(x.dim(), f.len())?;
    let a = f.moduli();
    if let Some(v) = trivial_value(x, &a) {
        return Ok(DualMaximizer {
            value: v,
            g: vec![0.0; a.len()],
            upper: v,
        });
    }
    solve::associate_maximize(x, &a)
}

/// A functional `z` with `|z|_{X'} <= 1` and `sum_k z_k f_k mu_k = |f|_X`.
///
/// Closed form for weighted `l^p`; otherwise the maximizer of the associate
/// problem for `X'` is used, with phases aligned to `f`.
pub fn norming_functional(x: &LatticeNorm, f: &LatticeVector) -> Result<LatticeVector> {
    ensure_dim(x.dim(), f.len())?;
    if !x.admits(f) {
        return Err(Error::PreconditionViolation(
            "vector has infinite norm; no norming functional".into(),
        ));
    }
    let n = x.dim();
    let phase = |z: Complex64| {
        if z.norm() > 0.0 {
            z.conj() / z.norm()
        } else {
            Complex64::new(1.0, 0.0)
        }
    };
    let norm = x.eval(f)?;
    if norm == 0.0 {
        return Ok(LatticeVector::zeros(n));
    }
    let mu = x.space().weights();
    let mask = x.mask();
    let mut z = LatticeVector::zeros(n);
    match x.kind() {
        NormKind::WeightedLp { p, w } => match p {
            Exponent::Infinity => {
                let mut best = (0.0, 0);
                for k in mask.indices() {
                    let v = f[k].norm() * w[k];
                    if v > best.0 {
                        best = (v, k);
                    }
                }
                let k = best.1;
                z.0[k] = phase(f[k]) * (w[k] / mu[k]);
            }
            Exponent::Finite(p) if *p == 1.0 => {
                for k in mask.indices() {
                    z.0[k] = phase(f[k]) * w[k];
                }
            }
            Exponent::Finite(p) => {
                for k in mask.indices() {
                    let r = f[k].norm() * w[k] / norm;
                    z.0[k] = phase(f[k]) * (r.powf(p - 1.0) * w[k]);
                }
            }
        },
        _ => {
            let dual = LatticeNorm::associate(x.clone());
            let m = solve::associate_maximize(&dual, &f.moduli())?;
            for k in 0..n {
                z.0[k] = phase(f[k]) * m.g[k];
            }
        }
    }
    Ok(z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondAssociate {
    pub norm: f64,
    pub second: f64,
    pub equal: bool,
}

/// Compare `|f|_X` with `|f|_{X''}`; finite-dimensional lattices have the
/// Fatou property, so the two must agree.
pub fn second_associate_check(x: &LatticeNorm, f: &LatticeVector) -> Result<SecondAssociate> {
    ensure_dim(x.dim(), f.len())?;
    if !x.admits(f) {
        return Ok(SecondAssociate {
            norm: f64::INFINITY,
            second: f64::INFINITY,
            equal: true,
        });
    }
    let norm = x.eval(f)?;
    let second = associate_norm(&LatticeNorm::associate(x.clone()), f)?;
    Ok(SecondAssociate {
        norm,
        second,
        equal: relative_error(norm, second) <= IDENTITY_TOL,
    })
}

/// Exercise the monotone-convergence hypothesis on a finite chain
/// `0 <= f_1 <= f_2 <= ... <= f`.
///
/// A finite chain has no limit, so the test is the quantitative one: norms
/// along the chain are nondecreasing, bounded by `|f|`, and the gap
/// `|f| - |f_n|` never exceeds `|f - f_n|`, which goes to zero with the
/// pointwise residual. Malformed chains are rejected.
pub fn lolu_condition_check(
    x: &LatticeNorm,
    f: &LatticeVector,
    chain: &[LatticeVector],
) -> Result<bool> {
    ensure_dim(x.dim(), f.len())?;
    if chain.is_empty() {
        return Err(Error::PreconditionViolation("chain is empty".into()));
    }
    let target = nonnegative_real(f, "f")?;
    let mut links = Vec::with_capacity(chain.len());
    for (i, fi) in chain.iter().enumerate() {
        ensure_dim(x.dim(), fi.len())?;
        links.push(nonnegative_real(fi, &format!("chain element {i}"))?);
    }
    for (i, li) in links.iter().enumerate() {
        if let Some(k) = (0..li.len()).find(|&k| li[k] > target[k]) {
            return Err(Error::PreconditionViolation(format!(
                "chain element {i} exceeds f at atom {k}"
            )));
        }
        if i > 0 {
            if let Some(k) = (0..li.len()).find(|&k| li[k] < links[i - 1][k]) {
                return Err(Error::PreconditionViolation(format!(
                    "chain decreases between elements {} and {i} at atom {k}",
                    i - 1
                )));
            }
        }
    }
    let full = x.eval_moduli(&target)?;
    if !full.is_finite() {
        return Err(Error::PreconditionViolation("f is not in X".into()));
    }
    let tol = 1e-7 * full.max(1.0);
    let mut previous = 0.0;
    for li in &links {
        let v = x.eval_moduli(li)?;
        let residual: Vec<f64> = li.iter().zip(&target).map(|(a, b)| b - a).collect();
        let gap_bound = x.eval_moduli(&residual)?;
        let gap = full - v;
        if v + tol < previous || gap < -tol || gap > gap_bound + tol {
            return Ok(false);
        }
        previous = v;
    }
    Ok(true)
}

fn nonnegative_real(f: &LatticeVector, what: &str) -> Result<Vec<f64>> {
    f.iter()
        .enumerate()
        .map(|(k, z)| {
            if z.im == 0.0 && z.re >= 0.0 {
                Ok(z.re)
            } else {
                Err(Error::PreconditionViolation(format!(
                    "{what} is not a nonnegative real function at atom {k}"
                )))
            }
        })
        .collect()
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish or both are infinite.
pub fn relative_error(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let scale = a.abs().max(b.abs());
    if !scale.is_finite() {
        return f64::INFINITY;
    }
    (a - b).abs() / scale
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::measure::FiniteMeasureSpace;
    use crate::norm::Mask;

    fn space(mu: &[f64]) -> Arc<FiniteMeasureSpace> {
        Arc::new(FiniteMeasureSpace::new(mu.to_vec()).unwrap())
    }

    #[test]
    fn l2_is_self_associate() {
        let x = LatticeNorm::lp(space(&[1.0, 1.0]), Exponent::Finite(2.0)).unwrap();
        let f = LatticeVector::from_real(&[3.0, 4.0]);
        assert!((associate_norm(&x, &f).unwrap() - 5.0).abs() < 1e-14);
        assert!((associate_norm_solver(&x, &f).unwrap().value - 5.0).abs() < 1e-9);
    }

    #[test]
    fn weighted_l1_associate_is_weighted_linf() {
        let x = LatticeNorm::weighted_lp(space(&[1.0, 1.0]), Exponent::Finite(1.0), vec![1.0, 2.0])
            .unwrap();
        let f = LatticeVector::from_real(&[2.0, 6.0]);
        assert_eq!(associate_norm(&x, &f).unwrap(), 3.0);
        let solver = associate_norm_solver(&x, &f).unwrap().value;
        assert!((solver - 3.0).abs() < 1e-8, "{solver}");
    }

    #[test]
    fn off_mask_gives_infinity() {
        let x = LatticeNorm::lp(space(&[1.0, 1.0]), Exponent::Finite(2.0))
            .unwrap()
            .with_mask(Mask::from_indices(2, &[0]).unwrap())
            .unwrap();
        let f = LatticeVector::from_real(&[1.0, 1.0]);
        assert_eq!(associate_norm(&x, &f).unwrap(), f64::INFINITY);
        let s = second_associate_check(&x, &f).unwrap();
        assert_eq!(
            s,
            SecondAssociate {
                norm: f64::INFINITY,
                second: f64::INFINITY,
                equal: true
            }
        );
    }

    #[test]
    fn l1_second_associate() {
        let x = LatticeNorm::lp(space(&[1.0, 1.0]), Exponent::Finite(1.0)).unwrap();
        let s = second_associate_check(&x, &LatticeVector::from_real(&[1.0, 1.0])).unwrap();
        assert_eq!(s.norm, 2.0);
        assert!((s.second - 2.0).abs() < 1e-8);
        assert!(s.equal);
    }

    #[test]
    fn norming_functionals_attain_the_norm() {
        let sp = space(&[0.5, 2.0, 1.5]);
        let f = LatticeVector(vec![
            Complex64::new(1.0, -2.0),
            Complex64::new(0.0, 0.5),
            Complex64::new(-3.0, 0.0),
        ]);
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let x = LatticeNorm::weighted_lp(
                sp.clone(),
                Exponent::new(p).unwrap(),
                vec![1.0, 0.5, 2.0],
            )
            .unwrap();
            let z = norming_functional(&x, &f).unwrap();
            let pairing = sp.pairing(&z, &f).unwrap();
            let norm = x.eval(&f).unwrap();
            assert!((pairing.re - norm).abs() < 1e-12 * norm, "p={p}");
            assert!(pairing.im.abs() < 1e-12 * norm);
            assert!(
                (associate_norm(&x, &z).unwrap() - 1.0).abs() < 1e-12,
                "p={p}"
            );
        }
    }

    #[test]
    fn chain_checks() {
        let sp = space(&[1.0, 1.0]);
        let x = LatticeNorm::lp(sp, Exponent::Finite(1.0)).unwrap();
        let f = LatticeVector::from_real(&[1.0, 1.0]);
        let chain: Vec<_> = (1..=20).map(|n| f.scale(1.0 - 1.0 / n as f64)).collect();
        assert!(lolu_condition_check(&x, &f, &chain).unwrap());

        let bad = vec![
            LatticeVector::from_real(&[0.5, 0.5]),
            LatticeVector::from_real(&[0.4, 0.6]),
        ];
        assert!(matches!(
            lolu_condition_check(&x, &f, &bad),
            Err(Error::PreconditionViolation(_))
        ));
        let over = vec![LatticeVector::from_real(&[1.5, 0.5])];
        assert!(lolu_condition_check(&x, &f, &over).is_err());
    }

    #[test]
    fn truncation_chain_in_linf() {
        let n = 8;
        let x = LatticeNorm::lp(space(&vec![1.0; n]), Exponent::Infinity).unwrap();
        let mut fv = vec![0.0; n];
        fv[0] = 1.0;
        let f = LatticeVector::from_real(&fv);
        // keep the first m coordinates of f, m = 1..=n
        let chain: Vec<_> = (1..=n)
            .map(|m| {
                LatticeVector::from_real(
                    &(0..n)
                        .map(|k| if k < m { fv[k] } else { 0.0 })
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        assert!(lolu_condition_check(&x, &f, &chain).unwrap());
    }
}
