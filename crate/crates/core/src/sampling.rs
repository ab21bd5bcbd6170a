//! Seeded sampling of unit balls and random test instances.
//!
//! All randomness comes from SplitMix64. Sample `i` of a run seeded with `s`
//! draws from its own stream, seeded with `s + i * 0x9E3779B97F4A7C15`
//! (wrapping), so samples can be generated in any order or in parallel.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::associate::norming_functional;
use crate::calderon::closed_lp;
use crate::error::{Error, Result};
use crate::measure::{FiniteMeasureSpace, LatticeVector};
use crate::norm::{Exponent, LatticeNorm, Mask};
use crate::par::Exec;

pub const STREAM_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// The generator for sub-stream `index` of a run seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed.wrapping_add(index.wrapping_mul(STREAM_STRIDE)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub count: usize,
    pub seed: u64,
}

const PHASES: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// Entries with independent real and imaginary parts uniform in `[-1, 1]`.
pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> LatticeVector {
    LatticeVector((0..n).map(|_| random_complex(rng)).collect())
}

pub fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
}

/// A random vector vanishing off `mask`.
pub fn random_vector_on<R: Rng>(rng: &mut R, mask: &Mask) -> LatticeVector {
    let mut v = random_vector(rng, mask.len());
    for k in 0..mask.len() {
        if !mask.contains(k) {
            v.0[k] = Complex64::new(0.0, 0.0);
        }
    }
    v
}

/// Points on the unit sphere of `norm`, restricted to its mask.
///
/// In order: the phased basis vectors `c e_k / |e_k|` with
/// `c in {1, i, -1, -i}`; then, when the associate norm has a closed form,
/// vectors attaining the pairing with random functionals (one eighth of the
/// budget); then normalized random directions. The list is truncated to
/// `cfg.count` points.
pub fn sample_sphere(
    norm: &LatticeNorm,
    cfg: SamplerConfig,
    exec: Exec,
) -> Result<Vec<LatticeVector>> {
    sample_sphere_with(norm, cfg, exec, &[])
}

/// Like [`sample_sphere`], with caller-supplied attaining vectors (they are
/// normalized) in place of the generated ones when `attaining` is nonempty.
pub fn sample_sphere_with(
    norm: &LatticeNorm,
    cfg: SamplerConfig,
    exec: Exec,
    attaining: &[LatticeVector],
) -> Result<Vec<LatticeVector>> {
    if cfg.count == 0 {
        return Err(Error::InvalidParameter(
            "sample count must be positive".into(),
        ));
    }
    let n = norm.dim();
    let mask = norm.mask().clone();
    if mask.count() == 0 {
        return Ok(vec![LatticeVector::zeros(n)]);
    }
    let mut out = Vec::with_capacity(cfg.count);
    'basis: for k in mask.indices() {
        let e = LatticeVector::basis(n, k, Complex64::new(1.0, 0.0));
        let s = norm.eval(&e)?;
        for phase in PHASES {
            if out.len() == cfg.count {
                break 'basis;
            }
            out.push(LatticeVector::basis(n, k, phase / s));
        }
    }
    let offset = out.len();
    let remaining = cfg.count - offset;
    let attaining = match closed_lp(norm) {
        _ if !attaining.is_empty() => {
            let count = attaining.len().min(remaining);
            exec.try_map(count, |i| normalize(norm, attaining[i].clone()))?
        }
        Some((p, w, m)) => {
            let dual = LatticeNorm::weighted_lp(
                norm.space().clone(),
                p.conjugate(),
                w.iter().map(|v| 1.0 / v).collect(),
            )?
            .with_mask(m)?;
            let count = (cfg.count / 8).min(remaining);

            exec.try_map(count, |i| {
                let mut rng = stream(cfg.seed, (offset + i) as u64);
                let u = random_vector_on(&mut rng, &mask);
                let z = norming_functional(&dual, &u)?;
                normalize(norm, z)
            })?
        }
        None => Vec::new(),
    };
    out.extend(attaining);
    let offset = out.len();
    let rest = exec.try_map(cfg.count - offset, |i| {
        let mut rng = stream(cfg.seed, (offset + i) as u64);
        normalize(norm, random_vector_on(&mut rng, &mask))
    })?;
    out.extend(rest);
    Ok(out)
}

fn normalize(norm: &LatticeNorm, v: LatticeVector) -> Result<LatticeVector> {
    let s = norm.eval(&v)?;
    if s > 0.0 && s.is_finite() {
        Ok(v.scale(1.0 / s))
    } else {
        Err(Error::PreconditionViolation(format!(
            "cannot normalize a vector of norm {s}"
        )))
    }
}

/// Random instances for tests, benches and the verification suites.
pub mod gen {
    use super::*;

    pub const EXPONENTS: [f64; 5] = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];

    pub fn positive<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(lo..=hi)).collect()
    }

    pub fn space<R: Rng>(rng: &mut R, n: usize) -> std::sync::Arc<FiniteMeasureSpace> {
        std::sync::Arc::new(
            FiniteMeasureSpace::new(positive(rng, n, 0.25, 4.0)).expect("positive masses"),
        )
    }

    pub fn exponent<R: Rng>(rng: &mut R) -> Exponent {
        Exponent::new(EXPONENTS[rng.random_range(0..EXPONENTS.len())]).expect("valid exponent")
    }

    pub fn weighted_lp<R: Rng>(
        rng: &mut R,
        space: &std::sync::Arc<FiniteMeasureSpace>,
        p: Exponent,
    ) -> LatticeNorm {
        let w = positive(rng, space.len(), 0.25, 4.0);
        LatticeNorm::weighted_lp(space.clone(), p, w).expect("valid weights")
    }

    /// A random nonempty mask with each atom kept with probability `keep`.
    pub fn mask<R: Rng>(rng: &mut R, n: usize, keep: f64) -> Mask {
        let bits: Vec<usize> = (0..n).filter(|_| rng.random_bool(keep)).collect();
        let bits = if bits.is_empty() {
            vec![rng.random_range(0..n)]
        } else {
            bits
        };
        Mask::from_indices(n, &bits).expect("indices in range")
    }

    pub fn table<R: Rng>(rng: &mut R, m: usize, l: usize) -> Vec<Complex64> {
        (0..m * l).map(|_| random_complex(rng)).collect()
    }
}
