use latticelab::associate::{
    associate_norm_closed_form, associate_norm_solver, norming_functional,
};
use latticelab::calderon::{lozanovskii_check, theta_dual_pairing_sup};
use latticelab::couple_ops::{
    build_adjoint_system, restrict_extend, support_equality_check, GBall, Matrix, OperatorOnCouple,
    ZBall, BOUND_SLACK,
};
use latticelab::par::Exec;
use latticelab::sampling::{gen, random_vector_on, stream, SamplerConfig};
use latticelab::seminet::{
    cauchy_subsequence, cauchy_tail_excess, greedy_net, induce_semimetrics, separated_set,
    BilinearSystem, NetAudit,
};
use latticelab::{
    associate_norm, calderon_closed_form, calderon_norm, relative_error, CoupleSpec, Error,
    Exponent, LatticeNorm, LatticeVector, NormKind, Result,
};
use rand::Rng;
use serde::Serialize;

use crate::config::Resolved;

pub const SUITES: [&str; 7] = [
    "associate",
    "lozanovskii",
    "duality",
    "calderon",
    "support",
    "seminet",
    "adjoint",
];

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub instances: usize,
    pub max_relative_error: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Tolerances on the per-instance error of each suite.
fn tolerance(suite: &str) -> f64 {
    match suite {
        "associate" | "calderon" => 1e-6,
        "lozanovskii" | "duality" => 1e-5,
        "support" => 0.0,
        "seminet" => 1e-12,
        _ => BOUND_SLACK,
    }
}

/// Stream offset of each suite, so that suites draw independent instances.
fn offset(suite: &str) -> u64 {
    let i = SUITES
        .iter()
        .position(|s| *s == suite)
        .expect("known suite") as u64;
    (i + 1) << 32
}

struct Ctx<'a> {
    cfg: &'a Resolved,
    seed: u64,
    sampler: SamplerConfig,
}

impl Ctx<'_> {
    fn rng(&self, suite: &str, i: usize) -> impl Rng {
        stream(self.seed, offset(suite) + i as u64)
    }

    fn random_count(&self) -> usize {
        self.cfg.raw.verify.instances
    }

    fn max_dim(&self) -> usize {
        self.cfg.raw.verify.max_dim.max(1)
    }
}

fn run_cases<C: Sync>(
    suite: &str,
    cases: &[C],
    f: impl Fn(&C) -> Result<f64> + Sync + Send,
) -> SuiteReport {
    let results = Exec::default().map_slice(cases, |c| f(c));
    let tol = tolerance(suite);
    let mut worst: f64 = 0.0;
    let mut failure = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(e) if e.is_nan() => {
                failure.get_or_insert_with(|| format!("instance {i}: NaN error"));
            }
            Ok(e) => {
                worst = worst.max(e);
                if e > tol {
                    failure
                        .get_or_insert_with(|| format!("instance {i}: error {e:e} above {tol:e}"));
                }
            }
            Err(e) => {
                failure.get_or_insert_with(|| format!("instance {i}: {e}"));
            }
        }
    }
    SuiteReport {
        suite: suite.to_string(),
        instances: cases.len(),
        max_relative_error: worst,
        pass: failure.is_none(),
        failure,
    }
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
                *x = x
                    .clone()
                    .with_mask(gen::mask(rng, n, 0.75))
                    .expect("mask of a weighted norm");
            }
        }
    }
    let [x0, x1] = ends;
    CoupleSpec::new(x0, x1).expect("same space")
}

fn declared_pairs(ctx: &Ctx) -> Vec<(CoupleSpec, f64)> {
    ctx.cfg
        .couples
        .iter()
        .flat_map(|c| c.theta.iter().map(move |&t| (c.couple.clone(), t)))
        .collect()
}

fn associate_suite(ctx: &Ctx) -> SuiteReport {
    let mut cases: Vec<(LatticeNorm, LatticeVector, LatticeVector)> = Vec::new();
    for (i, (_, x)) in ctx.cfg.norms.iter().enumerate() {
        let mut rng = ctx.rng("associate", i);
        let f = random_vector_on(&mut rng, x.mask());
        let g = random_vector_on(&mut rng, x.mask());
        cases.push((x.clone(), f, g));
    }
    for i in 0..ctx.random_count() {
        let mut rng = ctx.rng("associate", ctx.cfg.norms.len() + i);
        let n = rng.random_range(1..=ctx.max_dim());
        let sp = gen::space(&mut rng, n);
        let p = gen::exponent(&mut rng);
        let x = gen::weighted_lp(&mut rng, &sp, p);
        let f = random_vector_on(&mut rng, x.mask());
        let g = random_vector_on(&mut rng, x.mask());
        cases.push((x, f, g));
    }
    run_cases("associate", &cases, |(x, f, g)| {
        let closed = associate_norm_closed_form(x, f)
            .ok_or_else(|| Error::PreconditionViolation("no closed form".into()))?;
        let solver = associate_norm_solver(x, f)?.value;
        let mut err = relative_error(solver, closed);
        // Hölder
        let pair = x.space().pairing(f, g)?.norm();
        let bound = closed * x.eval(g)?;
        err = err.max((pair - bound).max(0.0) / bound.max(f64::MIN_POSITIVE));
        // norming functional
        if !g.is_zero() {
            let phi = norming_functional(x, g)?;
            err = err.max(relative_error(
                x.space().pairing(&phi, g)?.norm(),
                x.eval(g)?,
            ));
            err = err.max(relative_error(associate_norm(x, &phi)?, 1.0));
        }
        Ok(err)
    })
}

fn theta_cases(ctx: &Ctx, suite: &str, masked: bool) -> Vec<(CoupleSpec, f64, LatticeVector)> {
    let declared = declared_pairs(ctx);
    let mut cases = Vec::new();
    for (i, (c, t)) in declared.iter().enumerate() {
        let mut rng = ctx.rng(suite, i);
        cases.push((c.clone(), *t, random_vector_on(&mut rng, &c.joint_mask())));
    }
    for i in 0..ctx.random_count() {
        let mut rng = ctx.rng(suite, declared.len() + i);
        let c = random_couple(&mut rng, ctx.max_dim(), masked);
        let t = if masked {
            rng.random_range(0.05..0.95)
        } else {
            [0.25, 0.5, 0.75][i % 3]
        };
        let f = random_vector_on(&mut rng, &c.joint_mask());
        cases.push((c, t, f));
    }
    cases
}

fn lozanovskii_suite(ctx: &Ctx) -> SuiteReport {
    run_cases(
        "lozanovskii",
        &theta_cases(ctx, "lozanovskii", true),
        |(c, t, f)| Ok(lozanovskii_check(c, *t, f)?.relerr),
    )
}

fn duality_suite(ctx: &Ctx) -> SuiteReport {
    run_cases(
        "duality",
        &theta_cases(ctx, "duality", true),
        |(c, t, x)| {
            let pairing = theta_dual_pairing_sup(c, *t, x)?.relerr;
            // (X0 ∩ X1)' = X0' + X1' on the joint support
            let a = c.associates();
            let sum = LatticeNorm::sum(a.x0().clone(), a.x1().clone())?;
            let inter = associate_norm(&c.intersection(), x)?;
            Ok(pairing.max(relative_error(inter, sum.eval(x)?)))
        },
    )
}

fn weighted(x: &LatticeNorm) -> Option<(Exponent, &[f64])> {
    match x.kind() {
        NormKind::WeightedLp { .. } => x.as_weighted_lp(),
        _ => None,
    }
}

fn calderon_suite(ctx: &Ctx) -> SuiteReport {
    let cases: Vec<_> = theta_cases(ctx, "calderon", false)
        .into_iter()
        .filter(|(c, _, _)| weighted(c.x0()).is_some() && weighted(c.x1()).is_some())
        .collect();
    run_cases("calderon", &cases, |(c, t, f)| {
        let (p0, w0) = weighted(c.x0()).expect("filtered");
        let (p1, w1) = weighted(c.x1()).expect("filtered");
        let (p, w) = calderon_closed_form(p0, w0, p1, w1, *t)?;
        let closed =
            LatticeNorm::weighted_lp(c.space().clone(), p, w)?.with_mask(c.joint_mask())?;
        Ok(relative_error(calderon_norm(c, *t, f)?, closed.eval(f)?))
    })
}

fn support_suite(ctx: &Ctx) -> SuiteReport {
    let mut cases = Vec::new();
    for i in 0..ctx.random_count().max(1) {
        let mut rng = ctx.rng("support", i);
        let n = rng.random_range(1..=ctx.max_dim().min(8));
        let sp = gen::space(&mut rng, n);
        let [x0, x1] = [0, 1].map(|_| {
            let p = gen::exponent(&mut rng);
            let m = gen::mask(&mut rng, n, 0.6);
            gen::weighted_lp(&mut rng, &sp, p)
                .with_mask(m)
                .expect("mask of a weighted norm")
        });
        let sub = x0.mask().intersect(&gen::mask(&mut rng, n, 0.6));
        let f = random_vector_on(&mut rng, x0.mask());
        let theta = rng.random_range(0.05..0.95);
        cases.push((CoupleSpec::new(x0, x1).expect("same space"), theta, sub, f));
    }
    run_cases("support", &cases, |(c, theta, sub, f)| {
        if !support_equality_check(c, *theta)? {
            return Err(Error::CheckFailed(
                "supports of intersection and product differ".into(),
            ));
        }
        let x = c.x0();
        let re = restrict_extend(x, sub)?;
        let y = re.restrict(f);
        let ey = re.extend(&y)?;
        if ey != y || re.extend(&re.restrict(&ey))? != ey {
            return Err(Error::CheckFailed(
                "E R is not the identity on the support".into(),
            ));
        }
        if re.y.eval(&y)? > x.eval(f)? {
            return Err(Error::CheckFailed("restriction increased the norm".into()));
        }
        Ok(relative_error(x.eval(&ey)?, re.y.eval(&y)?))
    })
}

fn seminet_suite(ctx: &Ctx) -> SuiteReport {
    let side = ctx.cfg.raw.verify.max_side.max(2);
    let eps = if ctx.cfg.raw.eps.is_empty() {
        vec![0.2, 0.1, 0.05]
    } else {
        ctx.cfg.raw.eps.clone()
    };
    let cases: Vec<BilinearSystem> = (0..ctx.random_count().max(1))
        .map(|i| {
            let mut rng = ctx.rng("seminet", i);
            let m = rng.random_range(2..=side);
            let l = rng.random_range(2..=side);
            BilinearSystem::new(m, l, gen::table(&mut rng, m, l)).expect("sized table")
        })
        .collect();
    run_cases("seminet", &cases, |s| {
        let (da, db) = induce_semimetrics(s)?;
        let mut err: f64 = 0.0;
        for d in [&da, &db] {
            err = err.max(d.axioms(Exec::Sequential).worst_excess);
        }
        for &e in &eps {
            let net = greedy_net(&da, e)?;
            let (slack, _, _) = NetAudit::new(s, &da, net, e)?.worst();
            err = err.max(-slack);
            for d in [&da, &db] {
                if greedy_net(d, e / 2.0)?.len() < separated_set(d, e)?.len() {
                    return Err(Error::CheckFailed(format!(
                        "packing exceeds covering at r = {e}"
                    )));
                }
            }
        }
        let extraction = cauchy_subsequence(&da, 12)?;
        err = err.max(cauchy_tail_excess(&da, &extraction));
        Ok(err.max(0.0))
    })
}

fn adjoint_suite(ctx: &Ctx) -> SuiteReport {
    let mut cases: Vec<OperatorOnCouple> = ctx
        .cfg
        .operators
        .iter()
        .filter(|o| o.op.normalization_exact())
        .map(|o| o.op.clone())
        .collect();
    for i in 0..ctx.random_count() {
        let mut rng = ctx.rng("adjoint", i);
        let g = random_couple(&mut rng, ctx.max_dim(), false);
        let sp = g.space().clone();
        let [x0, x1] = [0, 1].map(|_| {
            let p = gen::exponent(&mut rng);
            gen::weighted_lp(&mut rng, &sp, p)
        });
        let x = CoupleSpec::new(x0, x1).expect("same space");
        let sigma: Vec<f64> = (0..g.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let op = OperatorOnCouple::new(Matrix::diagonal_real(&sigma), g, x)
            .and_then(|t| t.normalized())
            .expect("diagonal operators between unmasked weighted spaces are bounded");
        cases.push(op);
    }
    let sampler = ctx.sampler;
    run_cases("adjoint", &cases, |t| {
        let exec = Exec::Sequential;
        let sum = build_adjoint_system(t, GBall::Intersection, ZBall::Sum, sampler)?;
        let mut worst = sum.joint_bound_slack(t, exec)?;
        for j in 0..2 {
            let sys = build_adjoint_system(t, GBall::Intersection, ZBall::Endpoint(j), sampler)?;
            worst = worst.min(sys.ercv_slack(t, j, exec)?);
            worst = worst.min(sys.domination_slack(t, j, exec)?);
            let own = build_adjoint_system(t, GBall::Endpoint(j), ZBall::Endpoint(j), sampler)?;
            worst = worst.min(own.contraction_slack(t, j, exec)?);
        }
        Ok((-worst).max(0.0))
    })
}

/// Run the selected suites, in the order given.
pub fn run(
    cfg: &Resolved,
    selected: &[String],
    seed: u64,
    sampler: SamplerConfig,
) -> Vec<SuiteReport> {
    let ctx = Ctx { cfg, seed, sampler };
    selected
        .iter()
        .map(|s| match s.as_str() {
            "associate" => associate_suite(&ctx),
            "lozanovskii" => lozanovskii_suite(&ctx),
            "duality" => duality_suite(&ctx),
            "calderon" => calderon_suite(&ctx),
            "support" => support_suite(&ctx),
            "seminet" => seminet_suite(&ctx),
            "adjoint" => adjoint_suite(&ctx),
            other => unreachable!("suite names are validated before running: {other}"),
        })
        .collect()
}

/// Reject unknown suite names before anything runs.
pub fn validate(names: &[String]) -> std::result::Result<(), String> {
    match names.iter().find(|n| !SUITES.contains(&n.as_str())) {
        Some(n) => Err(format!(
            "unknown suite {n:?}; known suites: {}",
            SUITES.join(", ")
        )),
        None => Ok(()),
    }
}
