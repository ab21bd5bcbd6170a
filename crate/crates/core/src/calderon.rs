//! Lattice couples, Calderón products and the duality identities relating
//! them to associate norms.

use std::sync::Arc;

use crate::associate::{associate_norm, relative_error, IDENTITY_TOL};
use crate::error::{ensure_dim, Error, Result};
use crate::measure::{FiniteMeasureSpace, LatticeVector};
use crate::norm::{check_theta, Exponent, LatticeNorm, Mask, NormKind};
use crate::solve::{self, Factorization};

/// Two lattice norms on one measure space.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupleSpec {
    x0: LatticeNorm,
    x1: LatticeNorm,
}

impl CoupleSpec {
    pub fn new(x0: LatticeNorm, x1: LatticeNorm) -> Result<Self> {
        // the intersection constructor performs the same-space check
        LatticeNorm::intersection(x0.clone(), x1.clone())?;
        Ok(Self { x0, x1 })
    }

    pub fn x0(&self) -> &LatticeNorm {
        &self.x0
    }

    pub fn x1(&self) -> &LatticeNorm {
        &self.x1
    }

    pub fn endpoint(&self, j: usize) -> &LatticeNorm {
        if j == 0 {
            &self.x0
        } else {
            &self.x1
        }
    }

    pub fn space(&self) -> &Arc<FiniteMeasureSpace> {
        self.x0.space()
    }

    pub fn dim(&self) -> usize {
        self.x0.dim()
    }

    pub fn joint_mask(&self) -> Mask {
        self.x0.mask().intersect(self.x1.mask())
    }

    pub fn intersection(&self) -> LatticeNorm {
        LatticeNorm::intersection(self.x0.clone(), self.x1.clone())
            .expect("checked at construction")
    }

    pub fn sum(&self) -> LatticeNorm {
        LatticeNorm::sum(self.x0.clone(), self.x1.clone()).expect("checked at construction")
    }

    /// The couple of associate norms `(X_0', X_1')`.
    pub fn associates(&self) -> CoupleSpec {
        CoupleSpec {
            x0: LatticeNorm::associate(self.x0.clone()),
            x1: LatticeNorm::associate(self.x1.clone()),
        }
    }

    pub fn calderon_product(&self, theta: f64) -> Result<LatticeNorm> {
        LatticeNorm::calderon_product(self.x0.clone(), self.x1.clone(), theta)
    }

    pub fn theta_norm(&self, theta: f64) -> Result<ThetaNorm> {
        ThetaNorm::new(self.clone(), theta)
    }
}

/// A weighted `l^p` description of a norm, when one is known in closed form.
pub(crate) fn closed_lp(x: &LatticeNorm) -> Option<(Exponent, Vec<f64>, Mask)> {
    match x.kind() {
        NormKind::WeightedLp { p, w } => Some((*p, w.clone(), x.mask().clone())),
        NormKind::Associate(inner) => {
            let (p, w, mask) = closed_lp(inner)?;
            Some((
                p.conjugate(),
                w.iter().map(|v| 1.0 / v).collect(),
                mask.intersect(x.mask()),
            ))
        }
        _ => None,
    }
}

/// The interpolation norm `X_0^(1-theta) X_1^theta` of a couple.
///
/// When both endpoints are weighted `l^p` (or associates of such) the norm
/// is again weighted `l^p` and is evaluated in closed form; otherwise every
/// evaluation runs the factorization solver.
#[derive(Debug, Clone)]
pub struct ThetaNorm {
    couple: CoupleSpec,
    theta: f64,
    realization: LatticeNorm,
    closed_form: Option<LatticeNorm>,
}

impl ThetaNorm {
    pub fn new(couple: CoupleSpec, theta: f64) -> Result<Self> {
        let realization = couple.calderon_product(theta)?;
        let closed_form = match (closed_lp(couple.x0()), closed_lp(couple.x1())) {
            (Some((p0, w0, m0)), Some((p1, w1, m1))) => {
                let (p, w) = calderon_closed_form(p0, &w0, p1, &w1, theta)?;
                Some(
                    LatticeNorm::weighted_lp(couple.space().clone(), p, w)?
                        .with_mask(m0.intersect(&m1))?,
                )
            }
            _ => None,
        };
        Ok(Self {
            couple,
            theta,
            realization,
            closed_form,
        })
    }

    pub fn couple(&self) -> &CoupleSpec {
        &self.couple
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn realization(&self) -> &LatticeNorm {
        &self.realization
    }

    pub fn closed_form(&self) -> Option<&LatticeNorm> {
        self.closed_form.as_ref()
    }

    pub fn mask(&self) -> &Mask {
        self.realization.mask()
    }

    /// The norm to use for fast evaluation: closed form when available.
    pub fn fast(&self) -> &LatticeNorm {
        self.closed_form.as_ref().unwrap_or(&self.realization)
    }

    pub fn eval(&self, f: &LatticeVector) -> Result<f64> {
        self.fast().eval(f)
    }

    pub fn eval_moduli(&self, a: &[f64]) -> Result<f64> {
        self.fast().eval_moduli(a)
    }

    /// Evaluate through the factorization solver even if a closed form exists.
    pub fn eval_solver(&self, f: &LatticeVector) -> Result<f64> {
        calderon_norm(&self.couple, self.theta, f)
    }
}

/// `inf { lambda : |f| <= lambda f_0^(1-theta) f_1^theta, |f_j|_j <= 1 }`.
pub fn calderon_norm(c: &CoupleSpec, theta: f64, f: &LatticeVector) -> Result<f64> {
    calderon_factorization(c, theta, f).map(|s| s.value)
}

/// The optimal factorization behind [`calderon_norm`]; factors are
/// normalized to the unit balls of the endpoints.
pub fn calderon_factorization(
    c: &CoupleSpec,
    theta: f64,
    f: &LatticeVector,
) -> Result<Factorization> {
    check_theta(theta)?;
    ensure_dim(c.dim(), f.len())?;
    solve::calderon_factorize(c.x0(), c.x1(), theta, &f.moduli())
}

pub(crate) fn calderon_moduli(
    x0: &LatticeNorm,
    x1: &LatticeNorm,
    theta: f64,
    a: &[f64],
) -> Result<Factorization> {
    solve::calderon_factorize(x0, x1, theta, a)
}

/// Exponent and weights of `l^{p0}(w0)^(1-theta) l^{p1}(w1)^theta`.
pub fn calderon_closed_form(
    p0: Exponent,
    w0: &[f64],
    p1: Exponent,
    w1: &[f64],
    theta: f64,
) -> Result<(Exponent, Vec<f64>)> {
    check_theta(theta)?;
    ensure_dim(w0.len(), w1.len())?;
    let p = Exponent::from_recip((1.0 - theta) * p0.recip() + theta * p1.recip());
    let w = w0
        .iter()
        .zip(w1)
        .map(|(a, b)| a.powf(1.0 - theta) * b.powf(theta))
        .collect();
    Ok((p, w))
}

/// Two evaluations of one quantity and their relative disagreement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    pub lhs: f64,
    pub rhs: f64,
    pub relerr: f64,
}

impl Agreement {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            relerr: relative_error(lhs, rhs),
        }
    }

    fn require(self, what: &str) -> Result<Self> {
        if self.relerr <= IDENTITY_TOL {
            Ok(self)
        } else {
            Err(Error::CheckFailed(format!(
                "{what}: {} vs {} (relative error {:e})",
                self.lhs, self.rhs, self.relerr
            )))
        }
    }
}

/// `(X_0^(1-theta) X_1^theta)' = X_0'^(1-theta) X_1'^theta`.
///
/// The left side is a maximization over the Calderón-product ball, the right
/// side a factorization with associate endpoints; neither side uses the
/// closed forms of the other.
pub fn lozanovskii_check(c: &CoupleSpec, theta: f64, f: &LatticeVector) -> Result<Agreement> {
    ensure_dim(c.dim(), f.len())?;
    if !c.joint_mask_admits(f) {
        return Err(Error::PreconditionViolation(
            "vector is not supported on the joint mask".into(),
        ));
    }
    let lhs = associate_norm(&c.calderon_product(theta)?, f)?;
    let rhs = calderon_norm(&c.associates(), theta, f)?;
    Agreement::new(lhs, rhs).require("associate of the product vs product of the associates")
}

/// `sup { |sum x_k y_k mu_k| : |y| <= 1 in X_0'^(1-theta) X_1'^theta }`,
/// compared with the direct Calderón norm of `x`.
///
/// `lhs` is the pairing supremum, `rhs` the direct value.
pub fn theta_dual_pairing_sup(c: &CoupleSpec, theta: f64, x: &LatticeVector) -> Result<Agreement> {
    ensure_dim(c.dim(), x.len())?;
    if !c.intersection().eval(x)?.is_finite() {
        return Err(Error::PreconditionViolation(
            "vector is not in the intersection of the couple".into(),
        ));
    }
    let assoc = c.associates();
    let product = LatticeNorm::calderon_product(assoc.x0().clone(), assoc.x1().clone(), theta)?;
    let lhs = associate_norm(&product, x)?;
    let rhs = calderon_norm(c, theta, x)?;
    Agreement::new(lhs, rhs).require("pairing supremum vs direct Calderón norm")
}

impl CoupleSpec {
    fn joint_mask_admits(&self, f: &LatticeVector) -> bool {
        let mask = self.joint_mask();
        f.iter()
            .enumerate()
            .all(|(k, z)| mask.contains(k) || (z.re == 0.0 && z.im == 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Arc<FiniteMeasureSpace> {
        Arc::new(FiniteMeasureSpace::counting(n).unwrap())
    }

    fn l1_linf(n: usize) -> CoupleSpec {
        let sp = unit(n);
        CoupleSpec::new(
            LatticeNorm::lp(sp.clone(), Exponent::Finite(1.0)).unwrap(),
            LatticeNorm::lp(sp, Exponent::Infinity).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn l1_linf_midpoint_is_l2() {
        let c = l1_linf(2);
        let v = calderon_norm(&c, 0.5, &LatticeVector::from_real(&[1.0, 1.0])).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-8, "{v}");
        let t = c.theta_norm(0.5).unwrap();
        assert_eq!(
            t.closed_form().unwrap().as_weighted_lp().unwrap().0,
            Exponent::Finite(2.0)
        );
    }

    #[test]
    fn equal_endpoints() {
        let sp = unit(3);
        let x = LatticeNorm::weighted_lp(sp, Exponent::Finite(3.0), vec![1.0, 2.0, 0.5]).unwrap();
        let c = CoupleSpec::new(x.clone(), x.clone()).unwrap();
        let f = LatticeVector::from_real(&[1.0, -2.0, 0.3]);
        let v = calderon_norm(&c, 0.3, &f).unwrap();
        let e = x.eval(&f).unwrap();
        assert!(relative_error(v, e) < 1e-7, "{v} {e}");
        assert_eq!(
            calderon_norm(&c, 0.3, &LatticeVector::zeros(3)).unwrap(),
            0.0
        );
    }

    #[test]
    fn closed_form_examples() {
        let (p, w) = calderon_closed_form(
            Exponent::Finite(1.0),
            &[1.0],
            Exponent::Infinity,
            &[1.0],
            0.5,
        )
        .unwrap();
        assert_eq!((p, w), (Exponent::Finite(2.0), vec![1.0]));
        let (p, w) = calderon_closed_form(
            Exponent::Finite(1.0),
            &[1.0, 4.0],
            Exponent::Infinity,
            &[4.0, 1.0],
            0.5,
        )
        .unwrap();
        assert_eq!((p, w), (Exponent::Finite(2.0), vec![2.0, 2.0]));
        assert!(calderon_closed_form(
            Exponent::Finite(1.0),
            &[1.0],
            Exponent::Infinity,
            &[1.0],
            1.0
        )
        .is_err());
    }

    #[test]
    fn lozanovskii_l1_linf() {
        let r =
            lozanovskii_check(&l1_linf(2), 0.5, &LatticeVector::from_real(&[3.0, 4.0])).unwrap();
        assert!(
            (r.lhs - 5.0).abs() < 1e-7 && (r.rhs - 5.0).abs() < 1e-7,
            "{r:?}"
        );
    }

    #[test]
    fn pairing_sup_basis_vector() {
        let r = theta_dual_pairing_sup(&l1_linf(2), 0.5, &LatticeVector::from_real(&[1.0, 0.0]))
            .unwrap();
        assert!(
            (r.lhs - 1.0).abs() < 1e-7 && (r.rhs - 1.0).abs() < 1e-7,
            "{r:?}"
        );
    }

    #[test]
    fn off_joint_mask_is_infinite() {
        let sp = unit(3);
        let x0 = LatticeNorm::lp(sp.clone(), Exponent::Finite(2.0))
            .unwrap()
            .with_mask(Mask::from_indices(3, &[0, 1]).unwrap())
            .unwrap();
        let x1 = LatticeNorm::lp(sp, Exponent::Finite(2.0))
            .unwrap()
            .with_mask(Mask::from_indices(3, &[1, 2]).unwrap())
            .unwrap();
        let c = CoupleSpec::new(x0, x1).unwrap();
        assert_eq!(
            calderon_norm(&c, 0.5, &LatticeVector::from_real(&[1.0, 1.0, 0.0])).unwrap(),
            f64::INFINITY
        );
        assert!(
            calderon_norm(&c, 0.5, &LatticeVector::from_real(&[0.0, 1.0, 0.0]))
                .unwrap()
                .is_finite()
        );
        assert!(lozanovskii_check(&c, 0.5, &LatticeVector::from_real(&[1.0, 0.0, 0.0])).is_err());
    }
}
