use num_complex::Complex64;

use crate::error::{ensure_dim, Error, Result};
use crate::par::Exec;

/// A finite semimetric space whose distances may be computed on demand.
pub trait Semimetric: Sync {
    fn len(&self) -> usize;

    fn dist(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A semimetric space stored as a full distance table.
#[derive(Debug, Clone, PartialEq)]
pub struct SemimetricSpace {
    n: usize,
    d: Vec<f64>,
}

impl SemimetricSpace {
    /// Row-major `n x n` table. Must be finite, nonnegative, symmetric and
    /// zero on the diagonal; the triangle inequality is checked separately by
    /// [`SemimetricSpace::axioms`].
    pub fn from_table(n: usize, d: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("semimetric space"));
        }
        ensure_dim(n * n, d.len())?;
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter(format!("d({i},{i}) must be 0")));
            }
            for j in 0..n {
                let v = d[i * n + j];
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "d({i},{j}) = {v} is not a finite nonnegative number"
                    )));
                }
                if v != d[j * n + i] {
                    return Err(Error::InvalidParameter(format!("d({i},{j}) != d({j},{i})")));
                }
            }
        }
        Ok(Self { n, d })
    }

    /// Tabulate `f` on pairs `i < j` and mirror it.
    pub fn from_fn<F>(n: usize, exec: Exec, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> f64 + Sync + Send,
    {
        if n == 0 {
            return Err(Error::Empty("semimetric space"));
        }
        let rows = exec.map(n, |i| (i + 1..n).map(|j| f(i, j)).collect::<Vec<f64>>());
        let mut d = vec![0.0; n * n];
        for (i, row) in rows.into_iter().enumerate() {
            for (off, v) in row.into_iter().enumerate() {
                let j = i + 1 + off;
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Self::from_table(n, d)
    }

    pub fn materialize<S: Semimetric + ?Sized>(s: &S, exec: Exec) -> Result<Self> {
        Self::from_fn(s.len(), exec, |i, j| s.dist(i, j))
    }

    /// Points `0..n` on the line with `d(i, j) = |i - j|`.
    pub fn line(n: usize) -> Result<Self> {
        Self::from_fn(n, Exec::Sequential, |i, j| i.abs_diff(j) as f64)
    }

    pub fn table(&self) -> &[f64] {
        &self.d
    }

    pub fn diameter(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Exhaustive check of the triangle inequality over all ordered triples.
    ///
    /// A triple counts as violating only beyond a rounding allowance of
    /// `4 eps (d(x,y) + d(y,z))`.
    pub fn axioms(&self, exec: Exec) -> AxiomReport {
        let n = self.n;
        let worst = exec.map(n, |x| {
            let mut worst = f64::NEG_INFINITY;
            for y in 0..n {
                let dxy = self.d[x * n + y];
                for z in 0..n {
                    let dyz = self.d[y * n + z];
                    let slack = 4.0 * f64::EPSILON * (dxy + dyz);
                    worst = worst.max(self.d[x * n + z] - dxy - dyz - slack);
                }
            }
            worst
        });
        AxiomReport {
            triples: (n as u64).pow(3),
            worst_excess: worst.into_iter().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

impl Semimetric for SemimetricSpace {
    fn len(&self) -> usize {
        self.n
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomReport {
    pub triples: u64,
    /// `max d(x,z) - d(x,y) - d(y,z)` less the rounding allowance.
    pub worst_excess: f64,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.worst_excess <= 0.0
    }
}

/// Finite point sets `A = 0..m`, `B = 0..l` and a complex table `h(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearSystem {
    m: usize,
    l: usize,
    h: Vec<Complex64>,
}

impl BilinearSystem {
    /// Row-major `m x l` table.
    pub fn new(m: usize, l: usize, h: Vec<Complex64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Empty("point set A"));
        }
        if l == 0 {
            return Err(Error::Empty("point set B"));
        }
        ensure_dim(m * l, h.len())?;
        if let Some(i) = h
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::InvalidParameter(format!(
                "h({}, {}) is not finite",
                i / l,
                i % l
            )));
        }
        Ok(Self { m, l, h })
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let m = rows.len();
        let l = rows.first().map_or(0, Vec::len);
        for r in &rows {
            ensure_dim(l, r.len())?;
        }
        Self::new(m, l, rows.into_iter().flatten().collect())
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.l
    }

    pub fn h(&self, a: usize, b: usize) -> Complex64 {
        self.h[a * self.l + b]
    }

    pub fn row(&self, a: usize) -> &[Complex64] {
        &self.h[a * self.l..(a + 1) * self.l]
    }

    pub fn table(&self) -> &[Complex64] {
        &self.h
    }

    /// `d_A(a1, a2) = max_b |h(a1, b) - h(a2, b)|`.
    pub fn d_a(&self, a1: usize, a2: usize) -> f64 {
        (0..self.l)
            .map(|b| (self.h(a1, b) - self.h(a2, b)).norm())
            .fold(0.0, f64::max)
    }

    /// `d_B(b1, b2) = max_a |h(a, b1) - h(a, b2)|`.
    pub fn d_b(&self, b1: usize, b2: usize) -> f64 {
        (0..self.m)
            .map(|a| (self.h(a, b1) - self.h(a, b2)).norm())
            .fold(0.0, f64::max)
    }

    /// The swapped system `h^T(b, a) = h(a, b)`.
    pub fn transpose(&self) -> Self {
        let mut h = Vec::with_capacity(self.h.len());
        for b in 0..self.l {
            for a in 0..self.m {
                h.push(self.h(a, b));
            }
        }
        Self {
            m: self.l,
            l: self.m,
            h,
        }
    }
}

/// The semimetrics `d_A` on `A` and `d_B` on `B` induced by `s`.
pub fn induce_semimetrics(s: &BilinearSystem) -> Result<(SemimetricSpace, SemimetricSpace)> {
    induce_semimetrics_with(s, Exec::default())
}

pub fn induce_semimetrics_with(
    s: &BilinearSystem,
    exec: Exec,
) -> Result<(SemimetricSpace, SemimetricSpace)> {
    let da = SemimetricSpace::from_fn(s.rows(), exec, |i, j| s.d_a(i, j))?;
    let db = SemimetricSpace::from_fn(s.cols(), exec, |i, j| s.d_b(i, j))?;
    Ok((da, db))
}
