//! Monotone lattice norms on `C^n`.
//!
//! Every norm here depends on a vector only through its moduli, so the
//! evaluation core works on nonnegative real vectors. A norm carries a mask
//! (its support): vectors that are nonzero off the mask have norm `+inf`.

use std::fmt;
use std::sync::Arc;

use crate::error::{ensure_dim, Error, Result};
use crate::measure::{FiniteMeasureSpace, LatticeVector};
use crate::{associate, calderon, solve};

/// Exponent of a weighted `l^p` norm, `1 <= p <= inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        if p.is_infinite() {
            Ok(Exponent::Infinity)
        } else {
            Ok(Exponent::Finite(p))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// `1/p`, with `1/inf = 0`.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    /// Exponent with the given reciprocal; `r` must lie in `[0, 1]`.
    pub fn from_recip(r: f64) -> Self {
        if r <= 0.0 {
            Exponent::Infinity
        } else {
            Exponent::Finite(1.0 / r.min(1.0))
        }
    }

    /// Hölder conjugate `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(self) -> Self {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn is_one(self) -> bool {
        matches!(self, Exponent::Finite(p) if p == 1.0)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

/// Admissible support of a norm, as a membership vector over the atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask(Vec<bool>);

impl Mask {
    pub fn full(n: usize) -> Self {
        Mask(vec![true; n])
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut m = vec![false; n];
        for &k in indices {
            if k >= n {
                return Err(Error::InvalidParameter(format!(
                    "mask index {k} out of range for {n} atoms"
                )));
            }
            m[k] = true;
        }
        Ok(Mask(m))
    }

    pub fn from_bits(n: usize, bits: u64) -> Self {
        Mask((0..n).map(|k| bits >> k & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.0[k]
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&k| self.0[k]).collect()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn intersect(&self, other: &Mask) -> Mask {
        Mask(self.0.iter().zip(&other.0).map(|(a, b)| *a && *b).collect())
    }

    pub fn union(&self, other: &Mask) -> Mask {
        Mask(self.0.iter().zip(&other.0).map(|(a, b)| *a || *b).collect())
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| !*a || *b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormKind {
    /// `(sum_k |f_k w_k|^p mu_k)^(1/p)`, or `max_k |f_k| w_k` for `p = inf`.
    WeightedLp { p: Exponent, w: Vec<f64> },
    /// `max(|f|_0, |f|_1)`.
    Intersection(Box<LatticeNorm>, Box<LatticeNorm>),
    /// `inf { |f_0|_0 + |f_1|_1 : f_0 + f_1 = f }`.
    Sum(Box<LatticeNorm>, Box<LatticeNorm>),
    /// Köthe dual: `sup { sum |f g| mu : |g|_X <= 1 }`.
    Associate(Box<LatticeNorm>),
    /// `X_0^(1-theta) X_1^theta`.
    CalderonProduct(Box<LatticeNorm>, Box<LatticeNorm>, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeNorm {
    space: Arc<FiniteMeasureSpace>,
    kind: NormKind,
    mask: Mask,
}

impl LatticeNorm {
    /// Weighted `l^p` on the full set of atoms.
    pub fn weighted_lp(space: Arc<FiniteMeasureSpace>, p: Exponent, w: Vec<f64>) -> Result<Self> {
        ensure_dim(space.len(), w.len())?;
        if let Some((k, &x)) = w
            .iter()
            .enumerate()
            .find(|(_, &x)| !(x > 0.0 && x.is_finite()))
        {
            return Err(Error::InvalidParameter(format!(
                "norm weight {k} must be positive and finite, got {x}"
            )));
        }
        if let Exponent::Finite(p) = p {
            Exponent::new(p)?;
        }
        let mask = Mask::full(space.len());
        Ok(Self {
            space,
            kind: NormKind::WeightedLp { p, w },
            mask,
        })
    }

    /// Plain `l^p` with unit weights.
    pub fn lp(space: Arc<FiniteMeasureSpace>, p: Exponent) -> Result<Self> {
        let n = space.len();
        Self::weighted_lp(space, p, vec![1.0; n])
    }

    /// Replace the support by `mask`. For derived norms the new mask must be
    /// contained in the derived one.
    pub fn with_mask(mut self, mask: Mask) -> Result<Self> {
        ensure_dim(self.space.len(), mask.len())?;
        match self.kind {
            NormKind::WeightedLp { .. } => {}
            _ => {
                if !mask.is_subset_of(&self.mask) {
                    return Err(Error::PreconditionViolation(
                        "mask of a derived norm can only be shrunk".into(),
                    ));
                }
            }
        }
        self.mask = mask;
        Ok(self)
    }

    pub fn intersection(x0: LatticeNorm, x1: LatticeNorm) -> Result<Self> {
        same_space(&x0, &x1)?;
        let mask = x0.mask.intersect(&x1.mask);
        Ok(Self {
            space: x0.space.clone(),
            kind: NormKind::Intersection(Box::new(x0), Box::new(x1)),
            mask,
        })
    }

    pub fn sum(x0: LatticeNorm, x1: LatticeNorm) -> Result<Self> {
        same_space(&x0, &x1)?;
        let mask = x0.mask.union(&x1.mask);
        Ok(Self {
            space: x0.space.clone(),
            kind: NormKind::Sum(Box::new(x0), Box::new(x1)),
            mask,
        })
    }

    pub fn associate(x: LatticeNorm) -> Self {
        let mask = x.mask.clone();
        Self {
            space: x.space.clone(),
            kind: NormKind::Associate(Box::new(x)),
            mask,
        }
    }

    pub fn calderon_product(x0: LatticeNorm, x1: LatticeNorm, theta: f64) -> Result<Self> {
        same_space(&x0, &x1)?;
        check_theta(theta)?;
        let mask = x0.mask.intersect(&x1.mask);
        Ok(Self {
            space: x0.space.clone(),
            kind: NormKind::CalderonProduct(Box::new(x0), Box::new(x1), theta),
            mask,
        })
    }

    pub fn space(&self) -> &Arc<FiniteMeasureSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.len()
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    /// The admissible support, as sorted atom indices.
    pub fn support(&self) -> Vec<usize> {
        self.mask.indices()
    }

    pub fn as_weighted_lp(&self) -> Option<(Exponent, &[f64])> {
        match &self.kind {
            NormKind::WeightedLp { p, w } => Some((*p, w)),
            _ => None,
        }
    }

    /// Whether `f` vanishes off the mask, i.e. has finite norm.
    pub fn admits(&self, f: &LatticeVector) -> bool {
        f.iter()
            .enumerate()
            .all(|(k, z)| self.mask.contains(k) || (z.re == 0.0 && z.im == 0.0))
    }

    pub fn eval(&self, f: &LatticeVector) -> Result<f64> {
        ensure_dim(self.dim(), f.len())?;
        self.eval_moduli(&f.moduli())
    }

    /// Norm of any vector whose moduli are `a` (entries must be `>= 0`).
    pub fn eval_moduli(&self, a: &[f64]) -> Result<f64> {
        ensure_dim(self.dim(), a.len())?;
        if a.iter()
            .enumerate()
            .any(|(k, &x)| x != 0.0 && !self.mask.contains(k))
        {
            return Ok(f64::INFINITY);
        }
        if a.iter().all(|&x| x == 0.0) {
            return Ok(0.0);
        }
        match &self.kind {
            NormKind::WeightedLp { p, w } => Ok(weighted_lp_value(
                *p,
                w,
                self.space.weights(),
                &self.mask,
                a,
            )),
            NormKind::Intersection(x0, x1) => Ok(x0.eval_moduli(a)?.max(x1.eval_moduli(a)?)),
            NormKind::Sum(x0, x1) => solve::sum_norm(x0, x1, &self.mask, a).map(|s| s.value),
            NormKind::Associate(x) => associate::associate_moduli(x, a),
            NormKind::CalderonProduct(x0, x1, theta) => {
                calderon::calderon_moduli(x0, x1, *theta, a).map(|s| s.value)
            }
        }
    }

    /// Short human-readable description used in reports.
    pub fn describe(&self) -> String {
        match &self.kind {
            NormKind::WeightedLp { p, .. } => format!("l^{p}(w)"),
            NormKind::Intersection(a, b) => format!("({} ∩ {})", a.describe(), b.describe()),
            NormKind::Sum(a, b) => format!("({} + {})", a.describe(), b.describe()),
            NormKind::Associate(a) => format!("{}'", a.describe()),
            NormKind::CalderonProduct(a, b, t) => {
                format!("{}^(1-{t}) {}^{t}", a.describe(), b.describe())
            }
        }
    }
}

fn same_space(a: &LatticeNorm, b: &LatticeNorm) -> Result<()> {
    if Arc::ptr_eq(&a.space, &b.space) || a.space == b.space {
        Ok(())
    } else {
        Err(Error::PreconditionViolation(
            "norms live on different measure spaces".into(),
        ))
    }
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "theta must lie strictly between 0 and 1, got {theta}"
        )))
    }
}

/// Closed-form weighted `l^p` value over masked coordinates. The finite-p
/// branch rescales by the largest term so that large exponents neither
/// overflow nor underflow.
pub(crate) fn weighted_lp_value(p: Exponent, w: &[f64], mu: &[f64], mask: &Mask, a: &[f64]) -> f64 {
    let terms = a
        .iter()
        .zip(w)
        .zip(mu)
        .enumerate()
        .filter(|(k, _)| mask.contains(*k))
        .map(|(_, ((&x, &w), &m))| (x * w, m));
    match p {
        Exponent::Infinity => terms.map(|(x, _)| x).fold(0.0, f64::max),
        Exponent::Finite(p) if p == 1.0 => terms.map(|(x, m)| x * m).sum(),
        Exponent::Finite(p) => {
            let terms: Vec<(f64, f64)> = terms.collect();
            let top = terms.iter().map(|t| t.0).fold(0.0, f64::max);
            if top == 0.0 {
                return 0.0;
            }
            let s: f64 = terms.iter().map(|(x, m)| (x / top).powf(p) * m).sum();
            top * s.powf(1.0 / p)
        }
    }
}
