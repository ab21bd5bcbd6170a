use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use super::*;
use crate::associate::norming_functional;
use crate::calderon::CoupleSpec;
use crate::measure::{FiniteMeasureSpace, LatticeVector};
use crate::norm::{Exponent, LatticeNorm, Mask};
use crate::par::Exec;
use crate::sampling::{gen, sample_sphere, stream, SamplerConfig};
use crate::seminet::{exact_covering_number, SemimetricSpace};

fn unit(n: usize) -> Arc<FiniteMeasureSpace> {
    Arc::new(FiniteMeasureSpace::counting(n).unwrap())
}

fn lp(sp: &Arc<FiniteMeasureSpace>, p: f64) -> LatticeNorm {
    LatticeNorm::lp(sp.clone(), Exponent::new(p).unwrap()).unwrap()
}

fn couple(sp: &Arc<FiniteMeasureSpace>, p0: f64, p1: f64) -> CoupleSpec {
    CoupleSpec::new(lp(sp, p0), lp(sp, p1)).unwrap()
}

fn geometric(n: usize) -> Vec<f64> {
    (0..n).map(|k| 0.5f64.powi(k as i32)).collect()
}

#[test]
fn diagonal_l2_norm_is_largest_entry() {
    let sp = unit(2);
    let c = couple(&sp, 2.0, 2.0);
    let t = OperatorOnCouple::new(Matrix::diagonal_real(&[1.0, 0.5]), c.clone(), c).unwrap();
    let e = endpoint_norm(&t, 0).unwrap();
    assert_eq!(
        e,
        EndpointNorm {
            value: 1.0,
            exact: true
        }
    );
}

#[test]
fn diagonal_weighted_l1_norm() {
    let sp = unit(3);
    let w = vec![1.0, 2.0, 0.5];
    let v = vec![3.0, 1.0, 1.0];
    let sigma = [0.5, -4.0, 0.25];
    let g = LatticeNorm::weighted_lp(sp.clone(), Exponent::Finite(1.0), w.clone()).unwrap();
    let x = LatticeNorm::weighted_lp(sp.clone(), Exponent::Finite(1.0), v.clone()).unwrap();
    let gc = CoupleSpec::new(g.clone(), g.clone()).unwrap();
    let xc = CoupleSpec::new(x.clone(), x.clone()).unwrap();
    let t = OperatorOnCouple::new(Matrix::diagonal_real(&sigma), gc, xc).unwrap();
    let e = endpoint_norm(&t, 1).unwrap();
    // the supremum is attained at a basis vector
    let by_basis = (0..3)
        .map(|k| {
            let b = LatticeVector::basis(3, k, Complex64::new(1.0, 0.0));
            x.eval(&t.apply(&b).unwrap()).unwrap() / g.eval(&b).unwrap()
        })
        .fold(0.0, f64::max);
    assert!(e.exact);
    assert!((e.value - by_basis).abs() < 1e-12);
    assert!((e.value - 2.0).abs() < 1e-12);
}

#[test]
fn dense_l3_estimate_is_bracketed() {
    let sp = unit(3);
    let c = couple(&sp, 3.0, 3.0);
    let mut rng = stream(11, 0);
    for _ in 0..4 {
        let a: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = Matrix::dense(3, 3, a.iter().map(|&x| Complex64::new(x, 0.0)).collect()).unwrap();
        let t = OperatorOnCouple::new(m, c.clone(), c.clone()).unwrap();
        let est = endpoint_norm(&t, 0).unwrap();
        assert!(!est.exact);
        // Riesz-Thorin from the l^1 and l^inf norms
        let col = (0..3)
            .map(|k| (0..3).map(|i| a[i * 3 + k].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let row = (0..3)
            .map(|i| (0..3).map(|k| a[i * 3 + k].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let upper = col.powf(1.0 / 3.0) * row.powf(2.0 / 3.0);
        // brute force over a mesh of the real unit sphere
        let l3 = |v: &[f64]| v.iter().map(|x| x.abs().powi(3)).sum::<f64>().cbrt();
        let steps = 80;
        let mut mesh: f64 = 0.0;
        for i in 0..=steps {
            for j in 0..=steps {
                let th = std::f64::consts::PI * i as f64 / steps as f64;
                let ph = 2.0 * std::f64::consts::PI * j as f64 / steps as f64;
                let v = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                let tv: Vec<f64> = (0..3)
                    .map(|r| (0..3).map(|k| a[r * 3 + k] * v[k]).sum())
                    .collect();
                mesh = mesh.max(l3(&tv) / l3(&v));
            }
        }
        assert!(est.value <= upper * (1.0 + 1e-9), "{} > {upper}", est.value);
        assert!(est.value >= 0.95 * mesh, "{} vs mesh {mesh}", est.value);
    }
}

#[test]
fn off_mask_image_is_unbounded() {
    let sp = unit(2);
    let g = couple(&sp, 2.0, 2.0);
    let x = CoupleSpec::new(
        lp(&sp, 2.0)
            .with_mask(Mask::from_indices(2, &[0]).unwrap())
            .unwrap(),
        lp(&sp, 2.0),
    )
    .unwrap();
    let t = OperatorOnCouple::new(Matrix::diagonal_real(&[1.0, 1.0]), g, x).unwrap();
    assert_eq!(endpoint_norm(&t, 0).unwrap().value, f64::INFINITY);
    assert!(t.normalized().is_err());
}

#[test]
fn one_atom_identity_table() {
    let sp = Arc::new(FiniteMeasureSpace::new(vec![2.5]).unwrap());
    let c = couple(&sp, 1.0, f64::INFINITY);
    let t = OperatorOnCouple::new(Matrix::diagonal_real(&[1.0]), c.clone(), c).unwrap();
    let sys = build_adjoint_system(
        &t,
        GBall::Intersection,
        ZBall::Sum,
        SamplerConfig { count: 4, seed: 1 },
    )
    .unwrap();
    for (i, g) in sys.g.iter().enumerate() {
        for (j, z) in sys.z.iter().enumerate() {
            let want = z[0] * g[0] * 2.5;
            assert!((sys.system.h(i, j) - want).norm() < 1e-12);
        }
    }
}

#[test]
fn diagonal_table_on_basis() {
    let sp = Arc::new(FiniteMeasureSpace::new(vec![1.0, 0.5, 2.0]).unwrap());
    let c = couple(&sp, 2.0, 2.0);
    let sigma = [3.0, -1.0, 0.5];
    let t = OperatorOnCouple::new(Matrix::diagonal_real(&sigma), c.clone(), c).unwrap();
    let mu = sp.weights();
    for i in 0..3 {
        for j in 0..3 {
            let ei = LatticeVector::basis(3, i, Complex64::new(1.0, 0.0));
            let ej = LatticeVector::basis(3, j, Complex64::new(1.0, 0.0));
            let want = if i == j { sigma[i] * mu[i] } else { 0.0 };
            assert!((t.pairing(&ei, &ej).unwrap() - want).norm() < 1e-12);
        }
    }
}

#[test]
fn normalized_table_is_bounded() {
    let sp = unit(4);
    let g = couple(&sp, 1.0, 2.0);
    let x = couple(&sp, 3.0, f64::INFINITY);
    let t = OperatorOnCouple::new(Matrix::diagonal_real(&[2.0, 1.0, 0.5, 3.0]), g, x)
        .unwrap()
        .normalized()
        .unwrap();
    assert!(t.normalization_exact());
    let norms = t.endpoint_norms().unwrap();
    assert!((norms[0].value.max(norms[1].value) - 1.0).abs() < 1e-12);
    let cfg = SamplerConfig { count: 60, seed: 3 };
    let sys = build_adjoint_system(&t, GBall::Intersection, ZBall::Sum, cfg).unwrap();
    assert!(sys.joint_bound_slack(&t, Exec::default()).unwrap() >= -BOUND_SLACK);
    let worst = (0..sys.g.len())
        .flat_map(|i| (0..sys.z.len()).map(move |j| (i, j)))
        .map(|(i, j)| sys.system.h(i, j).norm())
        .fold(0.0, f64::max);
    assert!(worst <= 1.0 + BOUND_SLACK, "{worst}");
}

#[test]
fn ercv_equality_and_zero() {
    let sp = unit(3);
    let c = couple(&sp, 2.0, 2.0);
    let t = OperatorOnCouple::new(
        Matrix::diagonal_real(&[1.0, 2.0, -1.0]),
        c.clone(),
        c.clone(),
    )
    .unwrap();
    let g = LatticeVector::from_real(&[0.3, -0.2, 0.9]);
    let tg = t.apply(&g).unwrap();
    let z = norming_functional(c.x0(), &tg).unwrap();
    let s = ercv_check(&t, &g, &z, 0).unwrap();
    assert!(s.abs() < 1e-12, "{s}");
    let zero = LatticeVector::zeros(3);
    assert_eq!(ercv_check(&t, &zero, &z, 1).unwrap(), 0.0);
}

#[test]
fn endpoint_sample_gives_adjoint_bounds() {
    let sp = unit(5);
    let g = couple(&sp, 1.0, 2.0);
    let x = couple(&sp, 2.0, 4.0);
    let mut rng = stream(5, 0);
    let a: Vec<Complex64> = (0..25)
        .map(|_| crate::sampling::random_complex(&mut rng))
        .collect();
    let t = OperatorOnCouple::new(Matrix::dense(5, 5, a).unwrap(), g, x)
        .unwrap()
        .normalized()
        .unwrap();
    let cfg = SamplerConfig { count: 40, seed: 9 };
    let sys = build_adjoint_system(&t, GBall::Intersection, ZBall::Endpoint(0), cfg).unwrap();
    assert!(sys.ercv_slack(&t, 0, Exec::default()).unwrap() >= -BOUND_SLACK);
    assert!(sys.domination_slack(&t, 0, Exec::default()).unwrap() >= -BOUND_SLACK);
    // the estimated normalization is not enough for the sum bound
    assert!(sys.joint_bound_slack(&t, Exec::default()).is_err());
}

#[test]
fn contraction_on_endpoint_ball() {
    let sp = unit(4);
    let g = couple(&sp, 1.0, f64::INFINITY);
    let x = couple(&sp, 1.0, f64::INFINITY);
    let t = OperatorOnCouple::new(Matrix::diagonal_real(&geometric(4)), g, x)
        .unwrap()
        .normalized()
        .unwrap();
    for j in 0..2 {
        let sys = build_adjoint_system(
            &t,
            GBall::Endpoint(j),
            ZBall::Endpoint(j),
            SamplerConfig { count: 30, seed: 2 },
        )
        .unwrap();
        assert!(sys.contraction_slack(&t, j, Exec::default()).unwrap() >= -BOUND_SLACK);
    }
}

fn eps_grid() -> Vec<f64> {
    vec![2.0, 1.0, 0.5, 0.25, 0.125]
}

#[test]
fn zero_operator_profile() {
    let sp = unit(3);
    let c = couple(&sp, 1.0, f64::INFINITY);
    let t = OperatorOnCouple::new(Matrix::diagonal_real(&[0.0; 3]), c.clone(), c).unwrap();
    let curve =
        compactness_profile(&t, 0.5, &eps_grid(), SamplerConfig { count: 50, seed: 4 }).unwrap();
    assert!(curve.points.iter().all(|p| p.covering_number == 1));
}

#[test]
fn geometric_diagonal_profile() {
    let n = 6;
    let sp = unit(n);
    let c = couple(&sp, 1.0, f64::INFINITY);
    let t = OperatorOnCouple::new(Matrix::diagonal_real(&geometric(n)), c.clone(), c).unwrap();
    let cfg = SamplerConfig {
        count: 120,
        seed: 8,
    };
    let eps = [1.5, 0.8, 0.4, 0.2, 0.1, 0.05];
    let curve = compactness_profile(&t, 0.5, &eps, cfg).unwrap();
    assert!(curve.nonincreasing());
    // the ball radius is 1 and the largest entry is 1
    assert!(curve.image_diameter <= 2.0 + 1e-9);
    for p in &curve.points {
        if p.eps >= curve.image_diameter {
            assert_eq!(p.covering_number, 1);
        }
    }
    let family = truncation_family(&t, 0.5, &eps, cfg).unwrap();
    assert_eq!(family.len(), n);
    for (m, c) in family.iter().enumerate().skip(1) {
        for (a, b) in family[m - 1].points.iter().zip(&c.points) {
            assert!(a.covering_number <= b.covering_number);
        }
    }
    let full = family.last().unwrap();
    for (a, b) in full.points.iter().zip(&curve.points) {
        assert!(a.covering_number <= b.covering_number);
    }
}

#[test]
fn identity_profile_grows_and_matches_oracle() {
    let sp = unit(2);
    let c = couple(&sp, 2.0, 2.0);
    let t =
        OperatorOnCouple::new(Matrix::diagonal_real(&[1.0, 1.0]), c.clone(), c.clone()).unwrap();
    let cfg = SamplerConfig {
        count: 16,
        seed: 21,
    };
    let eps = [2.5, 1.0, 0.5, 0.2];
    let curve = compactness_profile(&t, 0.5, &eps, cfg).unwrap();
    assert_eq!(curve.points[0].covering_number, 1);
    assert!(curve.points[3].covering_number > curve.points[0].covering_number);
    // same sample, exact covering numbers by set cover
    let theta = c.theta_norm(0.5).unwrap();
    let pts = sample_sphere(theta.fast(), cfg, Exec::default()).unwrap();
    let d = SemimetricSpace::from_fn(pts.len(), Exec::default(), |i, j| {
        theta.eval(&(&pts[i] - &pts[j])).unwrap()
    })
    .unwrap();
    let mut last = 0;
    for p in &curve.points {
        let exact = exact_covering_number(&d, p.eps).unwrap().unwrap();
        assert!(p.covering_number >= exact);
        assert!(exact >= last);
        last = exact;
    }
    assert!(last > 1);
}

#[test]
fn profile_rejects_bad_inputs() {
    let sp = unit(2);
    let c = couple(&sp, 1.0, 2.0);
    let t = OperatorOnCouple::new(Matrix::diagonal_real(&[1.0, 1.0]), c.clone(), c).unwrap();
    let cfg = SamplerConfig { count: 8, seed: 0 };
    assert!(compactness_profile(&t, 1.0, &[0.5], cfg).is_err());
    assert!(compactness_profile(&t, 0.5, &[0.5, 0.5], cfg).is_err());
    assert!(compactness_profile(&t, 0.5, &[0.5, -0.1], cfg).is_err());
    assert!(compactness_profile(&t, 0.5, &[], cfg).is_err());
    assert!(compactness_profile(&t, 0.5, &[0.5], SamplerConfig { count: 0, seed: 0 }).is_err());
}

#[test]
fn scalar_operator_ratio() {
    let sp = unit(3);
    let c = couple(&sp, 1.0, 3.0);
    let t = OperatorOnCouple::new(Matrix::diagonal_real(&[-0.7; 3]), c.clone(), c.clone()).unwrap();
    for theta in [0.2, 0.5, 0.9] {
        let pts = sample_sphere(
            c.theta_norm(theta).unwrap().fast(),
            SamplerConfig { count: 30, seed: 1 },
            Exec::default(),
        )
        .unwrap();
        let r = interp_bound_check(&t, theta, &pts).unwrap();
        assert!((r.worst - 0.7).abs() < 1e-9, "{}", r.worst);
        assert!((r.bound - 0.7).abs() < 1e-12);
    }
}

#[test]
fn interp_bound_random_diagonals() {
    let mut rng = stream(31, 0);
    for _ in 0..5 {
        let n = rng.random_range(1..=16);
        let sp = gen::space(&mut rng, n);
        let (p0, p1) = (gen::exponent(&mut rng), gen::exponent(&mut rng));
        let g = CoupleSpec::new(
            gen::weighted_lp(&mut rng, &sp, p0),
            gen::weighted_lp(&mut rng, &sp, p1),
        )
        .unwrap();
        let x = CoupleSpec::new(
            gen::weighted_lp(&mut rng, &sp, p0),
            gen::weighted_lp(&mut rng, &sp, p1),
        )
        .unwrap();
        let sigma: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let t = OperatorOnCouple::new(Matrix::diagonal_real(&sigma), g.clone(), x).unwrap();
        let theta = rng.random_range(0.05..0.95);
        let pts = sample_sphere(
            g.theta_norm(theta).unwrap().fast(),
            SamplerConfig {
                count: 400,
                seed: 2,
            },
            Exec::default(),
        )
        .unwrap();
        interp_bound_check(&t, theta, &pts).unwrap();
    }
}

#[test]
fn interp_ratio_near_first_endpoint() {
    let sp = unit(4);
    let g = CoupleSpec::new(
        LatticeNorm::weighted_lp(sp.clone(), Exponent::Finite(2.0), vec![1.0, 2.0, 1.0, 0.5])
            .unwrap(),
        lp(&sp, 4.0),
    )
    .unwrap();
    let x = CoupleSpec::new(lp(&sp, 2.0), lp(&sp, 4.0)).unwrap();
    let t =
        OperatorOnCouple::new(Matrix::diagonal_real(&[1.0, 3.0, -0.5, 0.2]), g.clone(), x).unwrap();
    let m0 = endpoint_norm(&t, 0).unwrap().value;
    let pts = sample_sphere(
        g.theta_norm(0.01).unwrap().fast(),
        SamplerConfig {
            count: 200,
            seed: 6,
        },
        Exec::default(),
    )
    .unwrap();
    let r = interp_bound_check(&t, 0.01, &pts).unwrap();
    assert!((r.worst - m0).abs() <= 0.02 * m0, "{} vs {m0}", r.worst);
}

#[test]
fn interp_bound_refuses_estimates() {
    let sp = unit(2);
    let c = couple(&sp, 3.0, 3.0);
    let m = Matrix::dense(
        2,
        2,
        [1.0, 2.0, -1.0, 0.5]
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect(),
    )
    .unwrap();
    let t = OperatorOnCouple::new(m, c.clone(), c.clone()).unwrap();
    let pts = vec![LatticeVector::from_real(&[1.0, 0.0])];
    assert!(matches!(
        interp_bound_check(&t, 0.5, &pts),
        Err(crate::Error::PreconditionViolation(_))
    ));
}

#[test]
fn restriction_examples() {
    let sp = unit(3);
    let x = lp(&sp, 2.0);
    let same = restrict_extend(&x, x.mask()).unwrap();
    let f = LatticeVector::from_real(&[1.0, -2.0, 0.5]);
    assert_eq!(same.restrict(&f), f);
    assert_eq!(same.extend(&f).unwrap(), f);

    let re = restrict_extend(&x, &Mask::from_indices(3, &[0, 1]).unwrap()).unwrap();
    let y = LatticeVector::from_real(&[3.0, 4.0, 0.0]);
    assert_eq!(
        x.eval(&re.extend(&y).unwrap()).unwrap(),
        re.y.eval(&y).unwrap()
    );
    assert_eq!(re.y.eval(&y).unwrap(), 5.0);
    assert_eq!(re.extend(&re.restrict(&y)).unwrap(), y);
    let rf = re.restrict(&f);
    assert!(re.y.eval(&rf).unwrap() < x.eval(&f).unwrap());
    assert!(re.extend(&f).is_err());

    let small = x
        .clone()
        .with_mask(Mask::from_indices(3, &[1]).unwrap())
        .unwrap();
    assert!(restrict_extend(&small, &Mask::from_indices(3, &[0, 1]).unwrap()).is_err());
}

#[test]
fn support_equality_examples() {
    let sp = unit(3);
    let c = CoupleSpec::new(
        lp(&sp, 1.0)
            .with_mask(Mask::from_indices(3, &[0, 1]).unwrap())
            .unwrap(),
        lp(&sp, 2.0)
            .with_mask(Mask::from_indices(3, &[1, 2]).unwrap())
            .unwrap(),
    )
    .unwrap();
    assert!(support_equality_check(&c, 0.3).unwrap());
    assert_eq!(c.intersection().mask().indices(), vec![1]);
    assert!(support_equality_check(&couple(&sp, 1.0, 4.0), 0.5).unwrap());
}

#[test]
fn support_equality_exhaustive_small() {
    for n in 1..=4 {
        let sp = unit(n);
        for a in 0..(1u64 << n) {
            for b in 0..(1u64 << n) {
                let c = CoupleSpec::new(
                    lp(&sp, 1.5).with_mask(Mask::from_bits(n, a)).unwrap(),
                    lp(&sp, 3.0).with_mask(Mask::from_bits(n, b)).unwrap(),
                )
                .unwrap();
                assert!(support_equality_check(&c, 0.5).unwrap());
            }
        }
    }
}

#[test]
fn diagonal_across_exponents_matches_sampling() {
    // l^p -> l^q for p below and above q; the closed form must dominate
    // every sample and be approached by the best one
    let mut rng = stream(41, 0);
    for (p, q) in [
        (1.5, 3.0),
        (3.0, 1.5),
        (f64::INFINITY, 2.0),
        (2.0, f64::INFINITY),
        (4.0, 1.0),
    ] {
        let n = 3;
        let sp = gen::space(&mut rng, n);
        let g = gen::weighted_lp(&mut rng, &sp, Exponent::new(p).unwrap());
        let x = gen::weighted_lp(&mut rng, &sp, Exponent::new(q).unwrap());
        let sigma: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let t = OperatorOnCouple::new(
            Matrix::diagonal_real(&sigma),
            CoupleSpec::new(g.clone(), g.clone()).unwrap(),
            CoupleSpec::new(x.clone(), x.clone()).unwrap(),
        )
        .unwrap();
        let e = endpoint_norm(&t, 0).unwrap();
        assert!(e.exact);
        let pts = sample_sphere(
            &g,
            SamplerConfig {
                count: 4000,
                seed: 3,
            },
            Exec::default(),
        )
        .unwrap();
        let best = pts
            .iter()
            .map(|v| x.eval(&t.apply(v).unwrap()).unwrap())
            .fold(0.0, f64::max);
        assert!(
            best <= e.value * (1.0 + 1e-12),
            "({p},{q}): sample {best} above {}",
            e.value
        );
        assert!(
            best >= 0.97 * e.value,
            "({p},{q}): sample {best} far below {}",
            e.value
        );
    }
}
