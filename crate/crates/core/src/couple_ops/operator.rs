use num_complex::Complex64;

use crate::associate::{associate_norm, norming_functional};
use crate::calderon::{closed_lp, CoupleSpec};
use crate::error::{ensure_dim, Error, Result};
use crate::measure::LatticeVector;
use crate::norm::{weighted_lp_value, Exponent, LatticeNorm, Mask, NormKind};
use crate::par::Exec;
use crate::sampling::{sample_sphere, SamplerConfig};

/// A complex matrix, stored densely or as a diagonal.
#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    /// Row-major `rows x cols`.
    Dense {
        rows: usize,
        cols: usize,
        a: Vec<Complex64>,
    },
    Diagonal(Vec<Complex64>),
}

impl Matrix {
    pub fn dense(rows: usize, cols: usize, a: Vec<Complex64>) -> Result<Self> {
        ensure_dim(rows * cols, a.len())?;
        Ok(Matrix::Dense { rows, cols, a })
    }

    pub fn diagonal_real(sigma: &[f64]) -> Self {
        Matrix::Diagonal(sigma.iter().map(|&s| Complex64::new(s, 0.0)).collect())
    }

    pub fn rows(&self) -> usize {
        match self {
            Matrix::Dense { rows, .. } => *rows,
            Matrix::Diagonal(d) => d.len(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Matrix::Dense { cols, .. } => *cols,
            Matrix::Diagonal(d) => d.len(),
        }
    }

    pub fn entry(&self, i: usize, k: usize) -> Complex64 {
        match self {
            Matrix::Dense { cols, a, .. } => a[i * cols + k],
            Matrix::Diagonal(d) if i == k => d[i],
            Matrix::Diagonal(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn apply(&self, g: &[Complex64]) -> Vec<Complex64> {
        match self {
            Matrix::Dense { rows, cols, a } => (0..*rows)
                .map(|i| {
                    a[i * cols..(i + 1) * cols]
                        .iter()
                        .zip(g)
                        .map(|(x, y)| x * y)
                        .sum()
                })
                .collect(),
            Matrix::Diagonal(d) => d.iter().zip(g).map(|(x, y)| x * y).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        match self {
            Matrix::Dense { rows, cols, a } => Matrix::Dense {
                rows: *rows,
                cols: *cols,
                a: a.iter().map(|x| x * s).collect(),
            },
            Matrix::Diagonal(d) => Matrix::Diagonal(d.iter().map(|x| x * s).collect()),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, Matrix::Diagonal(_))
    }
}

/// An estimate of `|T|_{G_j -> X_j}`. When `exact` is false the value is
/// only a lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointNorm {
    pub value: f64,
    pub exact: bool,
}

/// A matrix acting from the couple `G` to the couple `X`.
#[derive(Debug, Clone)]
pub struct OperatorOnCouple {
    matrix: Matrix,
    g: CoupleSpec,
    x: CoupleSpec,
    normalized: Option<[EndpointNorm; 2]>,
}

impl OperatorOnCouple {
    pub fn new(matrix: Matrix, g: CoupleSpec, x: CoupleSpec) -> Result<Self> {
        ensure_dim(g.dim(), matrix.cols())?;
        ensure_dim(x.dim(), matrix.rows())?;
        Ok(Self {
            matrix,
            g,
            x,
            normalized: None,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn source(&self) -> &CoupleSpec {
        &self.g
    }

    pub fn target(&self) -> &CoupleSpec {
        &self.x
    }

    pub fn apply(&self, g: &LatticeVector) -> Result<LatticeVector> {
        ensure_dim(self.g.dim(), g.len())?;
        Ok(LatticeVector(self.matrix.apply(g.as_slice())))
    }

    /// The functional `Sz` on the source space with
    /// `sum_k g_k (Sz)_k mu_k = sum_i z_i (Tg)_i nu_i` for every `g`.
    pub fn adjoint_apply(&self, z: &LatticeVector) -> Result<LatticeVector> {
        ensure_dim(self.x.dim(), z.len())?;
        let mu = self.g.space().weights();
        let nu = self.x.space().weights();
        let out = (0..self.g.dim())
            .map(|k| {
                let s: Complex64 = (0..self.x.dim())
                    .map(|i| z[i] * self.matrix.entry(i, k) * nu[i])
                    .sum();
                s / mu[k]
            })
            .collect();
        Ok(LatticeVector(out))
    }

    /// `h(g, z) = sum_i z_i (Tg)_i nu_i`.
    pub fn pairing(&self, g: &LatticeVector, z: &LatticeVector) -> Result<Complex64> {
        let tg = self.apply(g)?;
        self.x.space().pairing(z, &tg)
    }

    /// Divide by the larger endpoint norm so that `max_j |T|_j = 1`.
    pub fn normalized(self) -> Result<Self> {
        let e0 = endpoint_norm(&self, 0)?;
        let e1 = endpoint_norm(&self, 1)?;
        let m = e0.value.max(e1.value);
        if !m.is_finite() {
            return Err(Error::PreconditionViolation(
                "operator is unbounded on an endpoint".into(),
            ));
        }
        let s = if m > 0.0 { 1.0 / m } else { 1.0 };
        Ok(Self {
            matrix: self.matrix.scaled(s),
            normalized: Some([
                EndpointNorm {
                    value: e0.value * s,
                    exact: e0.exact,
                },
                EndpointNorm {
                    value: e1.value * s,
                    exact: e1.exact,
                },
            ]),
            ..self
        })
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized.is_some()
    }

    /// Whether normalization used exact endpoint norms, so that
    /// `max_j |T|_j <= 1` is guaranteed rather than estimated.
    pub fn normalization_exact(&self) -> bool {
        self.normalized.is_some_and(|e| e[0].exact && e[1].exact)
    }

    /// Endpoint norms recorded at normalization.
    pub fn endpoint_norms(&self) -> Option<[EndpointNorm; 2]> {
        self.normalized
    }

    /// Same operator with the matrix replaced, keeping the couples.
    pub fn with_matrix(&self, matrix: Matrix) -> Result<Self> {
        Self::new(matrix, self.g.clone(), self.x.clone())
    }
}

/// Whether a norm is evaluated without any optimization.
pub(crate) fn closed_eval(x: &LatticeNorm) -> bool {
    match x.kind() {
        NormKind::WeightedLp { .. } => true,
        NormKind::Associate(inner) => matches!(inner.kind(), NormKind::WeightedLp { .. }),
        NormKind::Intersection(a, b) => closed_eval(a) && closed_eval(b),
        _ => false,
    }
}

/// Seed of the sample set used for lower-bound estimates.
const ESTIMATE_SEED: u64 = 0x5EED_0F_0B5;
const ESTIMATE_SAMPLES: usize = 256;
const REFINE_STEPS: usize = 100;

/// `|T|_{G_j -> X_j}`.
///
/// Exact when `T` is diagonal between weighted `l^p` spaces (any pair of
/// exponents), when the source is weighted `l^1` (maximum over basis
/// vectors), or when the target is weighted `l^inf` (maximum over rows of
/// associate norms), provided the norms involved have closed forms. Otherwise a lower
/// bound: the best of a sample of the unit sphere, improved by a nonlinear
/// power iteration when both norms have closed-form associates.
pub fn endpoint_norm(t: &OperatorOnCouple, j: usize) -> Result<EndpointNorm> {
    if j > 1 {
        return Err(Error::InvalidParameter(format!(
            "endpoint index must be 0 or 1, got {j}"
        )));
    }
    let gn = t.g.endpoint(j);
    let xn = t.x.endpoint(j);
    let src = gn.mask();
    let n = t.g.dim();
    // unbounded as soon as an admissible source vector lands off the target mask
    for k in src.indices() {
        for i in 0..t.x.dim() {
            if !xn.mask().contains(i) && t.matrix.entry(i, k).norm() != 0.0 {
                return Ok(EndpointNorm {
                    value: f64::INFINITY,
                    exact: true,
                });
            }
        }
    }
    let closed = closed_eval(gn) && closed_eval(xn);
    let g_lp = closed_lp(gn);
    let x_lp = closed_lp(xn);

    if let (Matrix::Diagonal(d), Some((p, w, _)), Some((q, v, _))) = (&t.matrix, &g_lp, &x_lp) {
        let mu = t.g.space().weights();
        let nu = t.x.space().weights();
        // in coordinates a_k = g_k w_k mu_k^(1/p) the operator multiplies by c_k
        let c: Vec<f64> = src
            .indices()
            .into_iter()
            .map(|k| d[k].norm() * v[k] * nu[k].powf(q.recip()) / (w[k] * mu[k].powf(p.recip())))
            .collect();
        let value = if p.recip() >= q.recip() {
            c.iter().copied().fold(0.0, f64::max)
        } else {
            // Hölder with 1/r = 1/q - 1/p, attained
            let ones = vec![1.0; c.len()];
            weighted_lp_value(
                Exponent::from_recip(q.recip() - p.recip()),
                &ones,
                &ones,
                &Mask::full(c.len()),
                &c,
            )
        };
        return Ok(EndpointNorm { value, exact: true });
    }
    if g_lp.as_ref().is_some_and(|(p, _, _)| p.is_one()) {
        let mut value: f64 = 0.0;
        for k in src.indices() {
            let e = LatticeVector::basis(n, k, Complex64::new(1.0, 0.0));
            value = value.max(xn.eval(&t.apply(&e)?)? / gn.eval(&e)?);
        }
        return Ok(EndpointNorm {
            value,
            exact: closed,
        });
    }
    if let Some((Exponent::Infinity, v, _)) = &x_lp {
        let mu = t.g.space().weights();
        let mut value: f64 = 0.0;
        for i in xn.mask().indices() {
            let row = LatticeVector::from_real(
                &(0..n)
                    .map(|k| {
                        if src.contains(k) {
                            t.matrix.entry(i, k).norm() / mu[k]
                        } else {
                            0.0
                        }
                    })
                    .collect::<Vec<_>>(),
            );
            value = value.max(v[i] * associate_norm(gn, &row)?);
        }
        return Ok(EndpointNorm {
            value,
            exact: closed,
        });
    }

    let cfg = SamplerConfig {
        count: ESTIMATE_SAMPLES,
        seed: ESTIMATE_SEED,
    };
    let samples = sample_sphere(&gn.clone().with_mask(src.clone())?, cfg, Exec::default())?;
    let values = Exec::default().try_map(samples.len(), |i| xn.eval(&t.apply(&samples[i])?))?;
    let (mut best, mut at) = (0.0, 0);
    for (i, &v) in values.iter().enumerate() {
        if v > best {
            best = v;
            at = i;
        }
    }
    if let (Some((p, w, gm)), Some((q, v, xm))) = (&g_lp, &x_lp) {
        // dual norms as explicit weighted l^p, for closed-form norming functionals
        let g_dual = LatticeNorm::weighted_lp(
            gn.space().clone(),
            p.conjugate(),
            w.iter().map(|x| 1.0 / x).collect(),
        )?
        .with_mask(gm.clone())?;
        let x_norm =
            LatticeNorm::weighted_lp(xn.space().clone(), *q, v.clone())?.with_mask(xm.clone())?;
        let mut g = samples[at].clone();
        for _ in 0..REFINE_STEPS {
            let y = t.apply(&g)?;
            if y.is_zero() {
                break;
            }
            let z = norming_functional(&x_norm, &y)?;
            let u = t.adjoint_apply(&z)?;
            if u.is_zero() {
                break;
            }
            let next = norming_functional(&g_dual, &u)?;
            let s = gn.eval(&next)?;
            if !(s > 0.0) {
                break;
            }
            let next = next.scale(1.0 / s);
            let value = xn.eval(&t.apply(&next)?)?;
            if value <= best * (1.0 + 1e-14) {
                best = best.max(value);
                break;
            }
            best = value;
            g = next;
        }
    }
    Ok(EndpointNorm {
        value: best,
        exact: false,
    })
}
