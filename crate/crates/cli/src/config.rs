use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use latticelab::couple_ops::{Matrix, OperatorOnCouple};
use latticelab::io::{read_complex_table, NormRecord};
use latticelab::sampling::SamplerConfig;
use latticelab::seminet::BilinearSystem;
use latticelab::{CoupleSpec, FiniteMeasureSpace, LatticeNorm};
use serde::Deserialize;

/// Everything that can go wrong before a command starts running.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceRecord {
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupleRecord {
    pub x0: String,
    pub x1: String,
    #[serde(default)]
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorRecord {
    pub source: String,
    pub target: String,
    /// Real diagonal entries.
    #[serde(default)]
    pub diag: Option<Vec<f64>>,
    /// Dense complex matrix, rows indexed by the target space.
    #[serde(default)]
    pub csv: Option<PathBuf>,
    /// Divide by the larger endpoint norm.
    #[serde(default)]
    pub normalize: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyRecord {
    /// Random instances per suite, on top of the declared objects.
    #[serde(default = "default_instances")]
    pub instances: usize,
    /// Largest dimension of random norm instances.
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    /// Largest side of random bilinear systems.
    #[serde(default = "default_max_side")]
    pub max_side: usize,
}

fn default_instances() -> usize {
    20
}

fn default_max_dim() -> usize {
    8
}

fn default_max_side() -> usize {
    16
}

impl Default for VerifyRecord {
    fn default() -> Self {
        Self {
            instances: default_instances(),
            max_dim: default_max_dim(),
            max_side: default_max_side(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveringRecord {
    /// Table of `h`, rows are points of `A`.
    #[serde(default)]
    pub csv: Option<PathBuf>,
    /// Size of a generated random table when no file is given.
    #[serde(default)]
    pub rows: Option<usize>,
    #[serde(default)]
    pub cols: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompactnessRecord {
    pub operator: String,
    /// Defaults to the theta list of the source couple.
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub space: Option<SpaceRecord>,
    #[serde(default)]
    pub norms: BTreeMap<String, NormRecord>,
    #[serde(default)]
    pub couples: BTreeMap<String, CoupleRecord>,
    #[serde(default)]
    pub operators: BTreeMap<String, OperatorRecord>,
    #[serde(default)]
    pub sampler: Option<SamplerConfig>,
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default)]
    pub verify: VerifyRecord,
    #[serde(default)]
    pub covering: Option<CoveringRecord>,
    #[serde(default)]
    pub compactness: Option<CompactnessRecord>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct NamedCouple {
    pub name: String,
    pub couple: CoupleSpec,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct NamedOperator {
    pub name: String,
    pub source: String,
    pub op: OperatorOnCouple,
}

/// A config with every name resolved to a built object.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub raw: ExperimentConfig,
    pub norms: Vec<(String, LatticeNorm)>,
    pub couples: Vec<NamedCouple>,
    pub operators: Vec<NamedOperator>,
    pub base: PathBuf,
}

pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
}

fn check_theta(theta: f64, owner: &str) -> Result<(), ConfigError> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(bad(format!(
            "{owner}: theta must lie in (0, 1), got {theta}"
        )))
    }
}

impl ExperimentConfig {
    pub fn sampler(&self) -> Result<SamplerConfig, ConfigError> {
        match self.sampler {
            Some(s) if s.count > 0 => Ok(s),
            Some(_) => Err(bad("sampler count must be positive")),
            None => Err(bad("a sampler {count, seed} is required")),
        }
    }

    pub fn resolve(self, base: &Path) -> Result<Resolved, ConfigError> {
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(bad(format!("eps grid must be strictly positive, got {e}")));
        }
        let shared = match &self.space {
            Some(s) => Some(Arc::new(
                FiniteMeasureSpace::new(s.mu.clone()).map_err(|e| bad(format!("space: {e}")))?,
            )),
            None => None,
        };
        let mut norms = Vec::new();
        for (name, rec) in &self.norms {
            let built = match (&shared, rec.mu.is_empty()) {
                (Some(sp), true) => rec.build_on(sp.clone()),
                (_, false) => rec.build(),
                (None, true) => Err(latticelab::Error::InvalidParameter(
                    "no \"mu\" and no shared space".into(),
                )),
            };
            norms.push((
                name.clone(),
                built.map_err(|e| bad(format!("norm {name:?}: {e}")))?,
            ));
        }
        let find_norm = |name: &str, owner: &str| {
            norms
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, x)| x.clone())
                .ok_or_else(|| bad(format!("{owner}: unknown norm {name:?}")))
        };
        let mut couples = Vec::new();
        for (name, rec) in &self.couples {
            let owner = format!("couple {name:?}");
            let couple = CoupleSpec::new(find_norm(&rec.x0, &owner)?, find_norm(&rec.x1, &owner)?)
                .map_err(|e| bad(format!("{owner}: {e}")))?;
            for &t in &rec.theta {
                check_theta(t, &owner)?;
            }
            couples.push(NamedCouple {
                name: name.clone(),
                couple,
                theta: rec.theta.clone(),
            });
        }
        let find_couple = |name: &str, owner: &str| {
            couples
                .iter()
                .find(|c| c.name == name)
                .ok_or_else(|| bad(format!("{owner}: unknown couple {name:?}")))
        };
        let mut operators = Vec::new();
        for (name, rec) in &self.operators {
            let owner = format!("operator {name:?}");
            let g = find_couple(&rec.source, &owner)?.couple.clone();
            let x = find_couple(&rec.target, &owner)?.couple.clone();
            let matrix = match (&rec.diag, &rec.csv) {
                (Some(d), None) => Matrix::diagonal_real(d),
                (None, Some(p)) => {
                    let path = base.join(p);
                    let file = fs::File::open(&path)
                        .map_err(|e| bad(format!("{owner}: {}: {e}", path.display())))?;
                    let (m, l, a) =
                        read_complex_table(file).map_err(|e| bad(format!("{owner}: {e}")))?;
                    Matrix::dense(m, l, a).map_err(|e| bad(format!("{owner}: {e}")))?
                }
                _ => {
                    return Err(bad(format!(
                        "{owner}: give exactly one of \"diag\" and \"csv\""
                    )))
                }
            };
            let mut op =
                OperatorOnCouple::new(matrix, g, x).map_err(|e| bad(format!("{owner}: {e}")))?;
            if rec.normalize {
                op = op.normalized().map_err(|e| bad(format!("{owner}: {e}")))?;
            }
            operators.push(NamedOperator {
                name: name.clone(),
                source: rec.source.clone(),
                op,
            });
        }
        if let Some(c) = &self.compactness {
            if !operators.iter().any(|o| o.name == c.operator) {
                return Err(bad(format!(
                    "compactness: unknown operator {:?}",
                    c.operator
                )));
            }
            for &t in c.theta.iter().flatten() {
                check_theta(t, "compactness")?;
            }
        }
        Ok(Resolved {
            raw: self,
            norms,
            couples,
            operators,
            base: base.to_path_buf(),
        })
    }
}

impl Resolved {
    pub fn operator(&self, name: &str) -> &NamedOperator {
        self.operators
            .iter()
            .find(|o| o.name == name)
            .expect("names resolved at load")
    }

    /// The bilinear system for the covering command.
    pub fn covering_system(&self) -> Result<BilinearSystem, ConfigError> {
        let rec = self
            .raw
            .covering
            .as_ref()
            .ok_or_else(|| bad("a \"covering\" section is required"))?;
        match (&rec.csv, rec.rows, rec.cols) {
            (Some(p), None, None) => {
                let path = self.base.join(p);
                let file = fs::File::open(&path)
                    .map_err(|e| bad(format!("covering: {}: {e}", path.display())))?;
                let (m, l, a) =
                    read_complex_table(file).map_err(|e| bad(format!("covering: {e}")))?;
                BilinearSystem::new(m, l, a).map_err(|e| bad(format!("covering: {e}")))
            }
            (None, Some(m), Some(l)) if m > 0 && l > 0 => {
                let cfg = self.raw.sampler()?;
                let mut rng = latticelab::sampling::stream(cfg.seed, 0);
                let a = latticelab::sampling::gen::table(&mut rng, m, l);
                BilinearSystem::new(m, l, a).map_err(|e| bad(format!("covering: {e}")))
            }
            _ => Err(bad(
                "covering: give either \"csv\" or positive \"rows\" and \"cols\"",
            )),
        }
    }

    pub fn compactness_theta(&self) -> Result<Vec<f64>, ConfigError> {
        let rec = self
            .raw
            .compactness
            .as_ref()
            .ok_or_else(|| bad("a \"compactness\" section is required"))?;
        let theta = match &rec.theta {
            Some(t) => t.clone(),
            None => {
                let src = &self.operator(&rec.operator).source;
                self.couples
                    .iter()
                    .find(|c| &c.name == src)
                    .map(|c| c.theta.clone())
                    .unwrap_or_default()
            }
        };
        if theta.is_empty() {
            return Err(bad("compactness: no theta values"));
        }
        Ok(theta)
    }

    pub fn eps_grid(&self) -> Result<Vec<f64>, ConfigError> {
        if self.raw.eps.is_empty() {
            return Err(bad("an \"eps\" grid is required"));
        }
        Ok(self.raw.eps.clone())
    }
}
