//! A small conic modelling layer over the `clarabel` interior-point solver.
//!
//! Every lattice norm in this crate has a conic epigraph `{(x, t) : N(x) <= t}`
//! built from linear rows and three-dimensional power cones
//! `K_a = {(u, v, w) : u^a v^(1-a) >= |w|, u, v >= 0}`:
//!
//! * weighted `l^p`: `(r_k, t, w_k mu_k^(1/p) x_k) in K_(1/p)`, `sum r_k <= t`
//! * intersection: both epigraphs with the same `t`
//! * sum: `x <= x_0 + x_1`, `t_0 + t_1 <= t`
//! * Calderón product: `x_k <= F0_k^(1-theta) F1_k^theta`, `N_j(F_j) <= t`
//! * associate: the conic dual of the unit-ball support function problem
//!
//! Rows are stored as affine expressions `s(v)` constrained to a cone; the
//! backend translates them into clarabel's `A v + s = b` form.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::norm::{Exponent, LatticeNorm, Mask, NormKind};

/// Sparse affine expression `constant + sum coef * v[index]`.
#[derive(Debug, Clone, Default)]
pub(crate) struct Affine {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Affine {
    pub fn constant(c: f64) -> Self {
        Affine {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(i: usize) -> Self {
        Affine {
            terms: vec![(i, 1.0)],
            constant: 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.terms.iter().all(|&(_, c)| c == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Affine {
            terms: self.terms.iter().map(|&(i, c)| (i, c * s)).collect(),
            constant: self.constant * s,
        }
    }

    pub fn add(&mut self, other: &Affine, s: f64) {
        self.terms
            .extend(other.terms.iter().map(|&(i, c)| (i, c * s)));
        self.constant += other.constant * s;
    }

    pub fn plus(&self, other: &Affine, s: f64) -> Self {
        let mut out = self.clone();
        out.add(other, s);
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, c)| c * x[i]).sum::<f64>()
    }
}

#[derive(Debug, Default)]
pub(crate) struct Model {
    nvars: usize,
    zero: Vec<Affine>,
    nonneg: Vec<Affine>,
    power: Vec<(f64, [Affine; 3])>,
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub x: Vec<f64>,
    pub primal: f64,
    pub dual: f64,
    pub status: SolverStatus,
}

impl Solution {
    pub fn value(&self, e: &Affine) -> f64 {
        e.eval(&self.x)
    }

    pub fn converged(&self) -> bool {
        matches!(
            self.status,
            SolverStatus::Solved | SolverStatus::AlmostSolved
        )
    }
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(&mut self) -> Affine {
        self.nvars += 1;
        Affine::var(self.nvars - 1)
    }

    pub fn nonneg_var(&mut self) -> Affine {
        let v = self.var();
        self.nonneg.push(v.clone());
        v
    }

    /// `e == 0`
    pub fn eq(&mut self, e: Affine) {
        self.zero.push(e);
    }

    /// `e >= 0`
    pub fn geq0(&mut self, e: Affine) {
        self.nonneg.push(e);
    }

    /// `u^alpha v^(1-alpha) >= |w|`, `u, v >= 0`.
    pub fn power(&mut self, alpha: f64, u: Affine, v: Affine, w: Affine) {
        self.power.push((alpha, [u, v, w]));
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Minimize `objective` subject to all rows.
    pub fn minimize(&self, objective: &Affine) -> Solution {
        let n = self.nvars.max(1);
        let mut q = vec![0.0; n];
        for &(i, c) in &objective.terms {
            q[i] += c;
        }

        let rows: Vec<&Affine> = self
            .zero
            .iter()
            .chain(&self.nonneg)
            .chain(self.power.iter().flat_map(|(_, r)| r.iter()))
            .collect();
        let m = rows.len();
        let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
        let mut b = Vec::with_capacity(m);
        for (r, row) in rows.iter().enumerate() {
            b.push(row.constant);
            for &(j, c) in &row.terms {
                triplets.push((j, r, -c));
            }
        }
        triplets.sort_by_key(|a| (a.0, a.1));
        let mut colptr = vec![0usize; n + 1];
        let mut rowval: Vec<usize> = Vec::new();
        let mut nzval: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (j, r, v) in triplets {
            if last == Some((j, r)) {
                *nzval.last_mut().unwrap() += v;
                continue;
            }
            last = Some((j, r));
            rowval.push(r);
            nzval.push(v);
            colptr[j + 1] += 1;
        }
        for j in 0..n {
            colptr[j + 1] += colptr[j];
        }
        let a = CscMatrix::new(m, n, colptr, rowval, nzval);
        let p = CscMatrix::zeros((n, n));

        let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
        if !self.zero.is_empty() {
            cones.push(SupportedConeT::ZeroConeT(self.zero.len()));
        }
        if !self.nonneg.is_empty() {
            cones.push(SupportedConeT::NonnegativeConeT(self.nonneg.len()));
        }
        for (alpha, _) in &self.power {
            cones.push(SupportedConeT::PowerConeT(*alpha));
        }

        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .max_iter(SOLVER_MAX_ITER)
            .tol_gap_abs(1e-11)
            .tol_gap_rel(1e-11)
            .tol_feas(1e-11)
            .reduced_tol_gap_abs(1e-7)
            .reduced_tol_gap_rel(1e-7)
            .reduced_tol_feas(1e-7)
            .build()
            .expect("static solver settings are valid");
        let mut solver = match DefaultSolver::new(&p, &q, &a, &b, &cones, settings) {
            Ok(s) => s,
            Err(_) => {
                return Solution {
                    x: vec![0.0; n],
                    primal: f64::NAN,
                    dual: f64::NAN,
                    status: SolverStatus::NumericalError,
                }
            }
        };
        solver.solve();
        let sol = &solver.solution;
        Solution {
            x: sol.x.clone(),
            primal: sol.obj_val + objective.constant,
            dual: sol.obj_val_dual + objective.constant,
            status: sol.status,
        }
    }
}

pub(crate) const SOLVER_MAX_ITER: u32 = 200;

/// Add rows forcing `N(x) <= t` for the lattice norm `norm`. The entries of
/// `x` must be nonnegative expressions.
pub(crate) fn epigraph(m: &mut Model, norm: &LatticeNorm, x: &[Affine], t: &Affine) {
    let mask = norm.mask();
    let mut pinned: Option<Vec<Affine>> = None;
    for (k, xk) in x.iter().enumerate() {
        if !mask.contains(k) && !xk.is_zero() {
            m.eq(xk.clone());
            // pass a literal zero on: a pinned variable inside a cone leaves
            // the solver no interior
            pinned.get_or_insert_with(|| x.to_vec())[k] = Affine::constant(0.0);
        }
    }
    let x = pinned.as_deref().unwrap_or(x);
    let mu = norm.space().weights();
    match norm.kind() {
        NormKind::WeightedLp { p, w } => lp_epigraph(m, *p, w, mu, mask, x, t),
        NormKind::Intersection(a, b) => {
            epigraph(m, a, x, t);
            epigraph(m, b, x, t);
        }
        NormKind::Sum(a, b) => {
            let mut x0 = Vec::with_capacity(x.len());
            let mut x1 = Vec::with_capacity(x.len());
            for (k, xk) in x.iter().enumerate() {
                if !mask.contains(k) || xk.is_zero() {
                    x0.push(Affine::constant(0.0));
                    x1.push(Affine::constant(0.0));
                    continue;
                }
                let (u, v) = match (a.mask().contains(k), b.mask().contains(k)) {
                    (true, false) => (xk.clone(), Affine::constant(0.0)),
                    (false, true) => (Affine::constant(0.0), xk.clone()),
                    _ => {
                        let u = m.nonneg_var();
                        let v = m.nonneg_var();
                        m.geq0(u.plus(&v, 1.0).plus(xk, -1.0));
                        (u, v)
                    }
                };
                x0.push(u);
                x1.push(v);
            }
            let t0 = m.nonneg_var();
            let t1 = m.nonneg_var();
            m.geq0(t.plus(&t0, -1.0).plus(&t1, -1.0));
            epigraph(m, a, &x0, &t0);
            epigraph(m, b, &x1, &t1);
        }
        NormKind::Associate(inner) => match inner.as_weighted_lp() {
            Some((p, w)) => {
                let inv: Vec<f64> = w.iter().map(|v| 1.0 / v).collect();
                lp_epigraph(m, p.conjugate(), &inv, mu, mask, x, t);
            }
            None => associate_epigraph(m, inner, mask, x, t),
        },
        NormKind::CalderonProduct(a, b, theta) => {
            let mut f0 = Vec::with_capacity(x.len());
            let mut f1 = Vec::with_capacity(x.len());
            for (k, xk) in x.iter().enumerate() {
                if !mask.contains(k) || xk.is_zero() {
                    f0.push(Affine::constant(0.0));
                    f1.push(Affine::constant(0.0));
                    continue;
                }
                let u = m.nonneg_var();
                let v = m.nonneg_var();
                m.power(1.0 - theta, u.clone(), v.clone(), xk.clone());
                f0.push(u);
                f1.push(v);
            }
            epigraph(m, a, &f0, t);
            epigraph(m, b, &f1, t);
        }
    }
}

fn lp_epigraph(
    m: &mut Model,
    p: Exponent,
    w: &[f64],
    mu: &[f64],
    mask: &Mask,
    x: &[Affine],
    t: &Affine,
) {
    let active: Vec<usize> = (0..x.len())
        .filter(|&k| mask.contains(k) && !x[k].is_zero())
        .collect();
    match p {
        Exponent::Infinity => {
            for &k in &active {
                m.geq0(t.plus(&x[k], -w[k]));
            }
            if active.is_empty() {
                m.geq0(t.clone());
            }
        }
        Exponent::Finite(p) if p == 1.0 => {
            let mut row = t.clone();
            for &k in &active {
                row.add(&x[k], -w[k] * mu[k]);
            }
            m.geq0(row);
        }
        Exponent::Finite(p) => {
            let mut row = t.clone();
            for &k in &active {
                let r = m.var();
                m.power(
                    1.0 / p,
                    r.clone(),
                    t.clone(),
                    x[k].scaled(w[k] * mu[k].powf(1.0 / p)),
                );
                row.add(&r, -1.0);
            }
            m.geq0(row);
        }
    }
}

/// `sup { sum_k y_k g_k mu_k : g >= 0, N_inner(g) <= 1 } <= s`, written through
/// conic duality: if the ball is `{v : s_i(v) in K_i}` then the supremum of
/// `c . v` is at most `sum_i const_i z_i` for every `z_i in K_i*` with
/// `c_j + sum_i coef_ij z_i = 0`, with equality at the optimum.
fn associate_epigraph(
    m: &mut Model,
    inner_norm: &LatticeNorm,
    mask: &Mask,
    y: &[Affine],
    s: &Affine,
) {
    let n = inner_norm.dim();
    let mu = inner_norm.space().weights();
    let mut inner = Model::new();
    let g: Vec<Affine> = (0..n).map(|_| inner.nonneg_var()).collect();
    epigraph(&mut inner, inner_norm, &g, &Affine::constant(1.0));

    let mut columns: Vec<Affine> = vec![Affine::default(); inner.nvars()];
    for (k, gk) in g.iter().enumerate() {
        if mask.contains(k) {
            let j = gk.terms[0].0;
            columns[j] = y[k].scaled(mu[k]);
        }
    }
    let mut bound = s.clone();
    let absorb = |row: &Affine, z: &Affine, columns: &mut Vec<Affine>, bound: &mut Affine| {
        for &(j, c) in &row.terms {
            columns[j].add(z, c);
        }
        bound.add(z, -row.constant);
    };
    for row in &inner.zero {
        let z = m.var();
        absorb(row, &z, &mut columns, &mut bound);
    }
    for row in &inner.nonneg {
        let z = m.nonneg_var();
        absorb(row, &z, &mut columns, &mut bound);
    }
    for (alpha, rows) in &inner.power {
        let z: Vec<Affine> = (0..3).map(|_| m.var()).collect();
        // dual of K_a is {(u, v, w) : (u/a)^a (v/(1-a))^(1-a) >= |w|}
        m.power(
            *alpha,
            z[0].scaled(1.0 / alpha),
            z[1].scaled(1.0 / (1.0 - alpha)),
            z[2].clone(),
        );
        for (row, zi) in rows.iter().zip(&z) {
            absorb(row, zi, &mut columns, &mut bound);
        }
    }
    for col in columns {
        if !col.terms.is_empty() || col.constant != 0.0 {
            m.eq(col);
        }
    }
    m.geq0(bound);
}
