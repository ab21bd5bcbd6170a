use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use latticelab::couple_ops::compactness_profile;
use latticelab::io::{write_rows, CompactnessRow, CoveringRow, NetAuditRow};
use latticelab::par::Exec;
use latticelab::seminet::{
    exact_covering_number, greedy_net, induce_semimetrics, NetAudit, Semimetric, SemimetricSpace,
    EXACT_COVER_LIMIT,
};

use crate::config::{self, ConfigError, Resolved};
use crate::suites;

/// Slack allowed in the net audit.
const AUDIT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

struct Prepared {
    cfg: Resolved,
    out: PathBuf,
}

fn prepare(path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<Prepared, ConfigError> {
    let mut raw = config::load(path)?;
    if let (Some(seed), Some(s)) = (seed, raw.sampler.as_mut()) {
        s.seed = seed;
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let out = match (out, &raw.out) {
        (Some(o), _) => o,
        (None, Some(o)) => base.join(o),
        (None, None) => PathBuf::from("out"),
    };
    let cfg = raw.resolve(&base)?;
    Ok(Prepared { cfg, out })
}

fn create(out: &Path, name: &str) -> Result<fs::File> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(name);
    fs::File::create(&path).with_context(|| format!("creating {}", path.display()))
}

pub fn verify(
    path: &Path,
    out: Option<PathBuf>,
    selected: &[String],
    seed: Option<u64>,
) -> Result<Outcome> {
    let p = prepare(path, out, seed)?;
    let names: Vec<String> = if !selected.is_empty() {
        selected.to_vec()
    } else if !p.cfg.raw.suites.is_empty() {
        p.cfg.raw.suites.clone()
    } else {
        suites::SUITES.iter().map(|s| s.to_string()).collect()
    };
    suites::validate(&names).map_err(ConfigError)?;
    let sampler = p.cfg.raw.sampler()?;
    let reports = suites::run(&p.cfg, &names, sampler.seed, sampler);
    let mut text = serde_json::to_string_pretty(&reports)?;
    text.push('\n');
    fs::create_dir_all(&p.out).with_context(|| format!("creating {}", p.out.display()))?;
    let file = p.out.join("verify_report.json");
    fs::write(&file, text).with_context(|| format!("writing {}", file.display()))?;
    for r in &reports {
        println!(
            "{:<12} {:>5} instances  max error {:.3e}  {}",
            r.suite,
            r.instances,
            r.max_relative_error,
            if r.pass { "pass" } else { "FAIL" }
        );
        if let Some(f) = &r.failure {
            println!("    {f}");
        }
    }
    Ok(Outcome::from_pass(reports.iter().all(|r| r.pass)))
}

fn curve(d: &SemimetricSpace, eps: &[f64]) -> Result<Vec<CoveringRow>> {
    eps.iter()
        .map(|&e| {
            let exact = if d.len() <= EXACT_COVER_LIMIT {
                exact_covering_number(d, e)?
            } else {
                None
            };
            Ok(CoveringRow {
                eps: e,
                greedy_size: greedy_net(d, e)?.len(),
                exact_size: exact,
            })
        })
        .collect()
}

pub fn covering(path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<Outcome> {
    let p = prepare(path, out, seed)?;
    let system = p.cfg.covering_system()?;
    let eps = p.cfg.eps_grid()?;
    let (da, db) = induce_semimetrics(&system)?;
    write_rows(create(&p.out, "covering_d_a.csv")?, &curve(&da, &eps)?)?;
    write_rows(create(&p.out, "covering_d_b.csv")?, &curve(&db, &eps)?)?;
    let mut audit = Vec::with_capacity(eps.len());
    for &e in &eps {
        let net = greedy_net(&da, e)?;
        let a = NetAudit::new(&system, &da, net, e)?;
        let (slack, _, _) = a.worst();
        audit.push(NetAuditRow {
            eps: e,
            approx_error_max: a.max_error(),
            bound_2eps: 2.0 * e,
            within_bound: slack >= -AUDIT_SLACK,
        });
    }
    write_rows(create(&p.out, "net_audit.csv")?, &audit)?;
    println!(
        "{} x {} system, {} eps values, written to {}",
        system.rows(),
        system.cols(),
        eps.len(),
        p.out.display()
    );
    Ok(Outcome::from_pass(audit.iter().all(|r| r.within_bound)))
}

pub fn compactness(path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<Outcome> {
    let p = prepare(path, out, seed)?;
    let rec = p
        .cfg
        .raw
        .compactness
        .clone()
        .ok_or_else(|| ConfigError("a \"compactness\" section is required".into()))?;
    let theta = p.cfg.compactness_theta()?;
    let eps = p.cfg.eps_grid()?;
    let sampler = p.cfg.raw.sampler()?;
    let op = &p.cfg.operator(&rec.operator).op;
    // cells are independent; rows are emitted in theta order
    let cells = Exec::default().map_slice(&theta, |&t| compactness_profile(op, t, &eps, sampler));
    let mut rows = Vec::new();
    let mut pass = true;
    for (&t, cell) in theta.iter().zip(cells) {
        match cell {
            Ok(c) => {
                let r = CompactnessRow::from_curve(&c);
                pass &= r.iter().all(|x| x.monotone == "ok");
                rows.extend(r);
            }
            Err(e) => {
                eprintln!("theta {t}: {e}");
                pass = false;
                rows.extend(
                    eps.iter()
                        .map(|&e| CompactnessRow::failed(t, e, sampler.count, sampler.seed)),
                );
            }
        }
    }
    write_rows(create(&p.out, "compactness.csv")?, &rows)?;
    println!(
        "{} theta values, {} eps values, written to {}",
        theta.len(),
        eps.len(),
        p.out.display()
    );
    Ok(Outcome::from_pass(pass))
}
