//! Atomic measure spaces and complex vectors living on them.

use std::ops::{Index, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};

/// `n` atoms with strictly positive masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMeasureSpace {
    weights: Vec<f64>,
}

impl FiniteMeasureSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter(
                "measure space needs at least one atom".into(),
            ));
        }
        if let Some((k, &m)) = weights
            .iter()
            .enumerate()
            .find(|(_, &m)| !(m > 0.0 && m.is_finite()))
        {
            return Err(Error::InvalidParameter(format!(
                "atom {k} has non-positive or non-finite mass {m}"
            )));
        }
        Ok(Self { weights })
    }

    /// Counting measure on `n` atoms.
    pub fn counting(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self, k: usize) -> f64 {
        self.weights[k]
    }

    /// The bilinear pairing `sum_k f_k g_k mu_k`.
    pub fn pairing(&self, f: &LatticeVector, g: &LatticeVector) -> Result<Complex64> {
        ensure_dim(self.len(), f.len())?;
        ensure_dim(self.len(), g.len())?;
        Ok(f.iter()
            .zip(g.iter())
            .zip(&self.weights)
            .map(|((a, b), m)| a * b * m)
            .sum())
    }

    /// `sum_k |f_k g_k| mu_k`.
    pub fn abs_pairing(&self, f: &LatticeVector, g: &LatticeVector) -> Result<f64> {
        ensure_dim(self.len(), f.len())?;
        ensure_dim(self.len(), g.len())?;
        Ok(f.iter()
            .zip(g.iter())
            .zip(&self.weights)
            .map(|((a, b), m)| a.norm() * b.norm() * m)
            .sum())
    }
}

/// A complex-valued function on the atoms of a [`FiniteMeasureSpace`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LatticeVector(pub Vec<Complex64>);

impl LatticeVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn basis(n: usize, k: usize, phase: Complex64) -> Self {
        let mut v = Self::zeros(n);
        v.0[k] = phase;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.norm()).collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|z| z * s).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Indices of nonzero entries.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, z)| z.re != 0.0 || z.im != 0.0)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }
}

impl Index<usize> for LatticeVector {
    type Output = Complex64;
    fn index(&self, k: usize) -> &Complex64 {
        &self.0[k]
    }
}

impl Sub for &LatticeVector {
    type Output = LatticeVector;
    fn sub(self, rhs: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl From<Vec<Complex64>> for LatticeVector {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}
