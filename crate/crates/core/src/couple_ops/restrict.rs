use crate::calderon::CoupleSpec;
use crate::error::{ensure_dim, Error, Result};
use crate::measure::LatticeVector;
use crate::norm::{LatticeNorm, Mask};

/// `Y = X` on a smaller support, with the zero-fill extension `E: Y -> X`
/// and the restriction `R: X -> Y`. Vectors of `Y` are stored at full
/// length, zero off the support.
#[derive(Debug, Clone)]
pub struct RestrictExtend {
    pub y: LatticeNorm,
    pub mask: Mask,
}

pub fn restrict_extend(x: &LatticeNorm, mask: &Mask) -> Result<RestrictExtend> {
    ensure_dim(x.dim(), mask.len())?;
    if !mask.is_subset_of(x.mask()) {
        return Err(Error::PreconditionViolation(
            "new support is not contained in the support of X".into(),
        ));
    }
    Ok(RestrictExtend {
        y: x.clone().with_mask(mask.clone())?,
        mask: mask.clone(),
    })
}

impl RestrictExtend {
    pub fn restrict(&self, f: &LatticeVector) -> LatticeVector {
        let mut out = f.clone();
        for k in 0..out.len() {
            if !self.mask.contains(k) {
                out.0[k] = num_complex::Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    pub fn extend(&self, y: &LatticeVector) -> Result<LatticeVector> {
        if !self.y.admits(y) {
            return Err(Error::PreconditionViolation(
                "vector is not supported in Y".into(),
            ));
        }
        Ok(y.clone())
    }
}

/// Whether `X_0 ∩ X_1` and `X_0^(1-theta) X_1^theta` have the same support.
pub fn support_equality_check(c: &CoupleSpec, theta: f64) -> Result<bool> {
    Ok(c.intersection().mask() == c.calderon_product(theta)?.mask())
}
