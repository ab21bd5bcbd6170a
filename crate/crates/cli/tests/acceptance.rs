//! The twelve acceptance criteria. Each test writes one `criterion N: PASS`
//! or `FAIL` line straight to stderr, so the lines show up without
//! `--nocapture`.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use latticelab::associate::{associate_norm_closed_form, associate_norm_solver};
use latticelab::calderon::{lozanovskii_check, theta_dual_pairing_sup};
use latticelab::couple_ops::{
    build_adjoint_system, compactness_profile, restrict_extend, support_equality_check, GBall,
    Matrix, OperatorOnCouple, ZBall,
};
use latticelab::par::Exec;
use latticelab::sampling::{gen, random_vector, random_vector_on, stream, SamplerConfig};
use latticelab::seminet::{
    cauchy_subsequence, cauchy_tail_excess, greedy_net, induce_semimetrics, separated_set,
    BilinearSystem, NetAudit, SemimetricSpace,
};
use latticelab::{
    calderon_closed_form, calderon_norm, relative_error, CoupleSpec, Exponent, FiniteMeasureSpace,
    LatticeNorm, LatticeVector, Mask,
};
use num_complex::Complex64;
use rand::Rng;

fn report(n: usize, what: &str, ok: bool, detail: String) {
    let line = format!(
        "criterion {n:>2}: {} {what} ({detail})\n",
        if ok { "PASS" } else { "FAIL" }
    );
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    assert!(ok, "criterion {n} failed: {detail}");
}

fn random_couple<R: Rng>(rng: &mut R, max_dim: usize, masked: bool) -> CoupleSpec {
    let n = rng.random_range(1..=max_dim);
    let sp = gen::space(rng, n);
    let mut ends = [0, 1].map(|_| {
        let p = gen::exponent(rng);
        gen::weighted_lp(rng, &sp, p)
    });
    if masked {
        for x in ends.iter_mut() {
            if rng.random_bool(0.3) {
                *x = x.clone().with_mask(gen::mask(rng, n, 0.75)).unwrap();
            }
        }
    }
    let [x0, x1] = ends;
    CoupleSpec::new(x0, x1).unwrap()
}

#[test]
fn criterion_01_associate_solver_matches_closed_form() {
    let start = Instant::now();
    let results = Exec::default().map(200, |i| {
        let mut rng = stream(101, i as u64);
        let n = rng.random_range(1..=64);
        let sp = gen::space(&mut rng, n);
        let p = gen::exponent(&mut rng);
        let x = gen::weighted_lp(&mut rng, &sp, p);
        let f = random_vector(&mut rng, n);
        let closed = associate_norm_closed_form(&x, &f).unwrap();
        associate_norm_solver(&x, &f).map(|s| relative_error(s.value, closed))
    });
    let secs = start.elapsed().as_secs_f64();
    let errors: Vec<f64> = results
        .into_iter()
        .map(|r| r.unwrap_or(f64::INFINITY))
        .collect();
    let worst = errors.iter().copied().fold(0.0, f64::max);
    report(
        1,
        "associate norm solver vs conjugate closed form",
        worst <= 1e-6 && secs < 60.0,
        format!("200 instances, worst relative error {worst:.2e} <= 1e-6, {secs:.1} s < 60 s"),
    );
}

#[test]
fn criterion_02_lozanovskii() {
    let results = Exec::default().map(100, |i| {
        let mut rng = stream(102, i as u64);
        let c = random_couple(&mut rng, 16, true);
        let theta = rng.random_range(0.05..0.95);
        let f = random_vector_on(&mut rng, &c.joint_mask());
        lozanovskii_check(&c, theta, &f)
            .map(|a| a.relerr)
            .map_err(|e| e.to_string())
    });
    let failures: Vec<String> = results.iter().filter_map(|r| r.clone().err()).collect();
    let worst = results
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .copied()
        .fold(0.0, f64::max);
    report(
        2,
        "Lozanovskii equality",
        failures.is_empty() && worst <= 1e-5,
        format!(
            "100 couples, worst relative error {worst:.2e} <= 1e-5, {} failures {:?}",
            failures.len(),
            failures.first()
        ),
    );
}

#[test]
fn criterion_03_calderon_solver_matches_closed_form() {
    let results = Exec::default().map(100, |i| {
        let mut rng = stream(103, i as u64);
        let c = random_couple(&mut rng, 16, false);
        let f = random_vector(&mut rng, c.dim());
        let (p0, w0) = c.x0().as_weighted_lp().unwrap();
        let (p1, w1) = c.x1().as_weighted_lp().unwrap();
        let mut worst: f64 = 0.0;
        for theta in [0.25, 0.5, 0.75] {
            let (p, w) = calderon_closed_form(p0, w0, p1, w1, theta).unwrap();
            let closed = LatticeNorm::weighted_lp(c.space().clone(), p, w)
                .unwrap()
                .eval(&f)
                .unwrap();
            match calderon_norm(&c, theta, &f) {
                Ok(v) => worst = worst.max(relative_error(v, closed)),
                Err(_) => worst = f64::INFINITY,
            }
        }
        worst
    });
    let worst = results.into_iter().fold(0.0, f64::max);
    report(
        3,
        "Calderón solver vs closed form",
        worst <= 1e-6,
        format!("100 couples x 3 theta, worst relative error {worst:.2e} <= 1e-6"),
    );
}

#[test]
fn criterion_04_pairing_sup_routes_agree() {
    let results = Exec::default().map(100, |i| {
        let mut rng = stream(104, i as u64);
        let c = random_couple(&mut rng, 16, true);
        let theta = rng.random_range(0.05..0.95);
        let x = random_vector_on(&mut rng, &c.joint_mask());
        theta_dual_pairing_sup(&c, theta, &x)
            .map(|a| a.relerr)
            .map_err(|e| e.to_string())
    });
    let failures: Vec<String> = results.iter().filter_map(|r| r.clone().err()).collect();
    let worst = results
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .copied()
        .fold(0.0, f64::max);
    report(
        4,
        "duality-norming identity, two routes",
        failures.is_empty() && worst <= 1e-5,
        format!(
            "100 instances, worst relative error {worst:.2e} <= 1e-5, {} failures {:?}",
            failures.len(),
            failures.first()
        ),
    );
}

fn random_system(seed: u64, i: u64, max_side: usize) -> BilinearSystem {
    let mut rng = stream(seed, i);
    let m = rng.random_range(1..=max_side);
    let l = rng.random_range(1..=max_side);
    BilinearSystem::new(m, l, gen::table(&mut rng, m, l)).unwrap()
}

/// Rows drawn around a few centers, so nets at small eps are proper subsets.
fn clustered_system(seed: u64, i: u64) -> BilinearSystem {
    let mut rng = stream(seed, i);
    let m = rng.random_range(8..=32);
    let l = rng.random_range(2..=32);
    let k = rng.random_range(1..=4);
    let centers = gen::table(&mut rng, k, l);
    let spread = [0.01, 0.05, 0.1][rng.random_range(0..3)];
    let rows = (0..m)
        .map(|_| {
            let c = rng.random_range(0..k);
            (0..l)
                .map(|b| {
                    let z =
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    centers[c * l + b] + z * spread
                })
                .collect()
        })
        .collect();
    BilinearSystem::from_rows(rows).unwrap()
}

#[test]
fn criterion_05_semimetric_axioms() {
    let mut worst = f64::NEG_INFINITY;
    let mut triples = 0;
    for i in 0..50 {
        let s = random_system(105, i, 32);
        let (da, db) = induce_semimetrics(&s).unwrap();
        for d in [&da, &db] {
            let r = d.axioms(Exec::default());
            worst = worst.max(r.worst_excess);
            triples += r.triples;
        }
    }
    report(
        5,
        "semimetric axioms, exhaustive triples",
        worst <= 0.0,
        format!("50 systems, {triples} triples, worst excess {worst:.2e}"),
    );
}

#[test]
fn criterion_06_net_sandwich() {
    let mut worst = f64::INFINITY;
    let mut proper = 0;
    for i in 0..20 {
        let s = clustered_system(106, i);
        let (da, _) = induce_semimetrics(&s).unwrap();
        for eps in [0.05, 0.1, 0.2] {
            let net = greedy_net(&da, eps).unwrap();
            proper += usize::from(net.len() < s.rows());
            let (slack, _, _) = NetAudit::new(&s, &da, net, eps).unwrap().worst();
            worst = worst.min(slack);
        }
    }
    report(
        6,
        "net sandwich approx <= d_B <= approx + 2 eps",
        worst >= -1e-12,
        format!("20 systems x 3 eps ({proper} proper nets), worst slack {worst:.2e} >= -1e-12"),
    );
}

#[test]
fn criterion_07_packing_covering() {
    let radii = [0.05, 0.1, 0.2, 0.5, 1.0, 2.0];
    let mut checked = 0;
    let mut violations = Vec::new();
    let systems = (0..50)
        .map(|i| random_system(105, i, 32))
        .chain((0..20).map(|i| clustered_system(106, i)));
    for (i, s) in systems.enumerate() {
        let (da, db) = induce_semimetrics(&s).unwrap();
        for (side, d) in [("A", &da), ("B", &db)] {
            for r in radii {
                let cover = greedy_net(d, r / 2.0).unwrap().len();
                let packing = separated_set(d, r).unwrap().len();
                checked += 1;
                if cover < packing {
                    violations.push(format!("system {i} side {side} r {r}: {cover} < {packing}"));
                }
            }
        }
    }
    report(
        7,
        "greedy cover at r/2 >= r-separated set",
        violations.is_empty(),
        format!("{checked} checks, violations {violations:?}"),
    );
}

#[test]
fn criterion_08_cauchy_extraction() {
    let mut worst = f64::NEG_INFINITY;
    let mut depths = Vec::new();
    for i in 0..20 {
        let mut rng = stream(108, i);
        // points of the unit square, some sequences concentrating near a point
        let shrink = [1.0, 0.5, 0.1][i as usize % 3];
        let pts: Vec<(f64, f64)> = (0..256)
            .map(|_| {
                (
                    rng.random_range(0.0..1.0) * shrink,
                    rng.random_range(0.0..1.0) * shrink,
                )
            })
            .collect();
        let d = SemimetricSpace::from_fn(256, Exec::default(), |a, b| {
            ((pts[a].0 - pts[b].0).powi(2) + (pts[a].1 - pts[b].1).powi(2)).sqrt()
        })
        .unwrap();
        let e = cauchy_subsequence(&d, 16).unwrap();
        depths.push(e.depth());
        worst = worst.max(cauchy_tail_excess(&d, &e));
    }
    report(
        8,
        "Cauchy tails within 2 * 2^-N",
        worst <= 0.0,
        format!("20 sequences of length 256, depths {depths:?}, worst excess {worst:.2e}"),
    );
}

#[test]
fn criterion_09_adjoint_bounds() {
    let cfg_of = |i: u64| SamplerConfig {
        count: 500,
        seed: 900 + i,
    };
    let results = Exec::default().map(20, |i| {
        let mut rng = stream(109, i as u64);
        let n = rng.random_range(1..=16);
        let sp = gen::space(&mut rng, n);
        let p = Exponent::new([1.5, 2.0, 3.0, 4.0][rng.random_range(0..4)]).unwrap();
        let q = Exponent::new([1.0, 1.5, 2.0, 3.0][rng.random_range(0..4)]).unwrap();
        // l^1 sources and l^inf targets give exact endpoint norms for dense T
        let g = CoupleSpec::new(
            gen::weighted_lp(&mut rng, &sp, Exponent::Finite(1.0)),
            gen::weighted_lp(&mut rng, &sp, p),
        )
        .unwrap();
        let x = CoupleSpec::new(
            gen::weighted_lp(&mut rng, &sp, q),
            gen::weighted_lp(&mut rng, &sp, Exponent::Infinity),
        )
        .unwrap();
        let a = gen::table(&mut rng, n, n);
        let t = OperatorOnCouple::new(Matrix::dense(n, n, a).unwrap(), g, x)
            .unwrap()
            .normalized()
            .unwrap();
        assert!(
            t.normalization_exact(),
            "endpoint norms of instance {i} are estimates"
        );
        let exec = Exec::Sequential;
        let cfg = cfg_of(i as u64);
        let sum = build_adjoint_system(&t, GBall::Intersection, ZBall::Sum, cfg).unwrap();
        let mut worst = sum.joint_bound_slack(&t, exec).unwrap();
        for j in 0..2 {
            let sys =
                build_adjoint_system(&t, GBall::Intersection, ZBall::Endpoint(j), cfg).unwrap();
            worst = worst.min(sys.ercv_slack(&t, j, exec).unwrap());
        }
        worst
    });
    let worst = results.into_iter().fold(f64::INFINITY, f64::min);
    report(
        9,
        "adjoint table bounds, plain and normalized",
        worst >= -1e-9,
        format!("20 normalized dense operators, 500 samples, worst slack {worst:.2e} >= -1e-9"),
    );
}

#[test]
fn criterion_10_compactness_profile() {
    let n = 12;
    let sp = std::sync::Arc::new(FiniteMeasureSpace::counting(n).unwrap());
    let c = CoupleSpec::new(
        LatticeNorm::lp(sp.clone(), Exponent::Finite(1.0)).unwrap(),
        LatticeNorm::lp(sp, Exponent::Infinity).unwrap(),
    )
    .unwrap();
    let sigma: Vec<f64> = (0..n).map(|k| 0.5f64.powi(k as i32)).collect();
    let t = OperatorOnCouple::new(Matrix::diagonal_real(&sigma), c.clone(), c).unwrap();
    let eps = [4.0, 2.0, 1.5, 1.0, 0.5, 0.25, 0.125, 0.0625];
    let cfg = SamplerConfig {
        count: 2000,
        seed: 10,
    };
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for theta in [0.25, 0.5, 0.75] {
        let curve = compactness_profile(&t, theta, &eps, cfg).unwrap();
        let counts: Vec<usize> = curve.points.iter().map(|p| p.covering_number).collect();
        let monotone = counts.windows(2).all(|w| w[0] <= w[1]);
        let single = curve
            .points
            .iter()
            .filter(|p| p.eps >= curve.image_diameter)
            .all(|p| p.covering_number == 1);
        ok &= monotone && single;
        notes.push(format!(
            "theta {theta}: diameter {:.3}, counts {counts:?}",
            curve.image_diameter
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        10,
        "compactness profiles nonincreasing, one ball beyond the diameter",
        ok && secs < 120.0,
        format!(
            "n = 12, 2000 samples, {secs:.1} s < 120 s; {}",
            notes.join("; ")
        ),
    );
}

#[test]
fn criterion_11_restriction_extension() {
    let mut ok = true;
    let mut pairs = 0u64;
    for n in 1..=8 {
        let sp = std::sync::Arc::new(FiniteMeasureSpace::counting(n).unwrap());
        let x0 = LatticeNorm::lp(sp.clone(), Exponent::Finite(1.5)).unwrap();
        let x1 = LatticeNorm::lp(sp.clone(), Exponent::Finite(4.0)).unwrap();
        for a in 0..(1u64 << n) {
            for b in 0..(1u64 << n) {
                let c = CoupleSpec::new(
                    x0.clone().with_mask(Mask::from_bits(n, a)).unwrap(),
                    x1.clone().with_mask(Mask::from_bits(n, b)).unwrap(),
                )
                .unwrap();
                ok &= support_equality_check(&c, 0.5).unwrap();
                pairs += 1;
            }
        }
    }
    let mut rng = stream(111, 0);
    let mut exact = true;
    for _ in 0..200 {
        let n = rng.random_range(1..=8);
        let sp = gen::space(&mut rng, n);
        let p = gen::exponent(&mut rng);
        let x = gen::weighted_lp(&mut rng, &sp, p);
        let sub = gen::mask(&mut rng, n, 0.5);
        let re = restrict_extend(&x, &sub).unwrap();
        let y: LatticeVector = random_vector_on(&mut rng, &sub);
        let ey = re.extend(&y).unwrap();
        exact &= re.extend(&re.restrict(&ey)).unwrap() == ey;
        exact &= x.eval(&ey).unwrap() == re.y.eval(&y).unwrap();
    }
    report(
        11,
        "restriction and extension",
        ok && exact,
        format!("{pairs} mask pairs with equal supports: {ok}; E R = id and |Ey| = |y| exactly: {exact}"),
    );
}

#[test]
fn criterion_12_cli_determinism() {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/small.json");
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for run in ["first", "second"] {
        let out = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_latticelab"))
            .args(["verify", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .env_remove("LATTICELAB_OUT")
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stdout)
        );
        reports.push(std::fs::read(out.join("verify_report.json")).unwrap());
    }
    report(
        12,
        "CLI verify reports byte-identical across runs",
        reports[0] == reports[1],
        format!("{} and {} bytes", reports[0].len(), reports[1].len()),
    );
}
