use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algorithms::{AlgoConfig, Algorithm, Mode, DEFAULT_PULL_CAP};
use crate::bandit::{ArmSet, Family, DEFAULT_SIGMA};
use crate::cpe::{DecisionClass, PartitionMatroid, UniformMatroid};
use crate::error::{Error, Result};
use crate::lil::{theorem_error, DeltaForm};

fn default_nu() -> f64 {
    0.01
}

fn default_epsilon() -> f64 {
    0.01
}

fn default_trials() -> u64 {
    100
}

fn default_pull_cap() -> u64 {
    DEFAULT_PULL_CAP
}

fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}

fn default_mode() -> Mode {
    Mode::Heuristic
}

fn default_output() -> PathBuf {
    PathBuf::from("results.csv")
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRule {
    Fixed(usize),
    HalfN,
    One,
}

impl KRule {
    pub fn resolve(self, n: usize) -> Result<usize> {
        let k = match self {
            KRule::Fixed(k) => k,
            KRule::HalfN if n.is_multiple_of(2) => n / 2,
            KRule::HalfN => return Err(Error::Config(format!("k_rule half_n needs an even n, got {n}"))),
            KRule::One => 1,
        };
        if k == 0 || k >= n {
            return Err(Error::Config(format!("k = {k} is outside 1..{n}")));
        }
        Ok(k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub family: Family,
    #[serde(default)]
    pub alpha: f64,
    pub k_rule: KRule,
}

/// Decision class for `lil_clucb` cells run through the oracle loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassSpec {
    /// Feasible sets as arrays of 0-based arm indices.
    Explicit(Vec<Vec<usize>>),
    /// All K-subsets, K from the family's rule.
    TopK,
    Uniform { rank: usize },
    Partition { blocks: Vec<usize>, capacities: Vec<usize> },
}

impl ClassSpec {
    pub fn build(&self, n: usize, k: usize) -> Result<DecisionClass> {
        let dc = match self {
            ClassSpec::Explicit(sets) => DecisionClass::explicit(n, sets.iter().map(|s| ArmSet::new(s.clone())).collect())?,
            ClassSpec::TopK => DecisionClass::top_k(n, k)?,
            ClassSpec::Uniform { rank } => DecisionClass::matroid(Arc::new(UniformMatroid::new(n, *rank)?))?,
            ClassSpec::Partition { blocks, capacities } => {
                DecisionClass::matroid(Arc::new(PartitionMatroid::new(blocks.clone(), capacities.clone())?))?
            }
        };
        if dc.n() != n {
            return Err(Error::Config(format!("decision class has {} arms but the cell has n = {n}", dc.n())));
        }
        Ok(dc)
    }
}

/// One experiment grid: families × `n_values` × algorithms, `trials` runs each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub families: Vec<FamilySpec>,
    pub n_values: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon_faithful: f64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_pull_cap")]
    pub pull_cap: u64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_output")]
    pub output_path: PathBuf,
    /// Randomly relabel the arms of every trial's instance.
    #[serde(default)]
    pub shuffle_labels: bool,
    /// Record wall time; `false` writes 0 so reruns produce identical files.
    #[serde(default = "yes")]
    pub timing: bool,
    #[serde(default)]
    pub decision_class: Option<ClassSpec>,
}

impl ExperimentConfig {
    /// A config with every optional field at its default.
    pub fn new(families: Vec<FamilySpec>, n_values: Vec<usize>, algorithms: Vec<Algorithm>) -> Self {
        Self {
            families,
            n_values,
            algorithms,
            mode: default_mode(),
            nu: default_nu(),
            epsilon_faithful: default_epsilon(),
            trials: default_trials(),
            master_seed: 0,
            pull_cap: default_pull_cap(),
            sigma: default_sigma(),
            output_path: default_output(),
            shuffle_labels: false,
            timing: true,
            decision_class: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() || self.n_values.is_empty() || self.algorithms.is_empty() {
            return Err(Error::Config("families, n_values and algorithms must be nonempty".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(Error::Config(format!("nu must lie in (0, 1), got {}", self.nu)));
        }
        if !(self.epsilon_faithful > 0.0 && self.epsilon_faithful.is_finite()) {
            return Err(Error::Config(format!("epsilon_faithful must be positive, got {}", self.epsilon_faithful)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        if self.decision_class.is_some() && self.algorithms.iter().any(|&a| a != Algorithm::LilClucb) {
            return Err(Error::Config("decision_class is only supported with lil_clucb".into()));
        }
        if self.decision_class.is_some() && self.shuffle_labels {
            return Err(Error::Config("shuffle_labels cannot be combined with decision_class".into()));
        }
        for spec in &self.families {
            for &n in &self.n_values {
                let k = spec.k_rule.resolve(n)?;
                if self.pull_cap < n as u64 {
                    return Err(Error::Config(format!("pull_cap {} is below n = {n}", self.pull_cap)));
                }
                if let Some(class) = &self.decision_class {
                    class.build(n, k)?;
                }
                for &algorithm in &self.algorithms {
                    if algorithm == Algorithm::LilUcb && k != 1 {
                        return Err(Error::Config(format!("lil_ucb needs k = 1, {} gives k = {k} at n = {n}", spec.family)));
                    }
                    self.resolve_cell(algorithm, n)?;
                }
            }
        }
        Ok(())
    }

    /// Run parameters of one algorithm at one `n`.
    pub fn algo_config(&self, algorithm: Algorithm, n: usize) -> Result<AlgoConfig<f64>> {
        let cfg = AlgoConfig::for_mode(algorithm, self.mode, self.nu, self.epsilon_faithful, self.sigma, n)?;
        Ok(cfg.with_pull_cap(self.pull_cap))
    }

    /// Resolved parameters, with the faithful error guarantee re-checked.
    pub fn resolve_cell(&self, algorithm: Algorithm, n: usize) -> Result<ResolvedCell> {
        let cfg = self.algo_config(algorithm, n)?;
        let form = (self.mode == Mode::Faithful && algorithm.uses_lil()).then(|| algorithm.delta_form());
        let guaranteed_error = match form {
            Some(form) => {
                let err = theorem_error(cfg.delta, cfg.lil.epsilon, form, n)?;
                if !(err <= self.nu) {
                    return Err(Error::Config(format!("{algorithm} at n = {n}: derived delta gives error {err} > nu")));
                }
                Some(err)
            }
            None => None,
        };
        Ok(ResolvedCell { algorithm, n, delta: cfg.delta, epsilon: cfg.lil.epsilon, delta_form: form, guaranteed_error })
    }

    pub fn resolved(&self) -> Result<ResolvedConfig> {
        let mut cells = Vec::new();
        for &n in &self.n_values {
            for &algorithm in &self.algorithms {
                cells.push(self.resolve_cell(algorithm, n)?);
            }
        }
        Ok(ResolvedConfig { config: self.clone(), cells })
    }
}

/// Parameters actually used for an (algorithm, n) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedCell {
    pub algorithm: Algorithm,
    pub n: usize,
    pub delta: f64,
    pub epsilon: f64,
    /// Error form the faithful δ was derived from; absent in heuristic mode.
    pub delta_form: Option<DeltaForm>,
    pub guaranteed_error: Option<f64>,
}

/// The config with defaults filled in, plus the per-cell parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub config: ExperimentConfig,
    pub cells: Vec<ResolvedCell>,
}

/// Parses and validates a JSON config.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_str(text)
        .map_err(|e| Error::ConfigParse { line: e.line(), column: e.column(), message: e.to_string() })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// `results.csv` → `results.resolved.json`.
pub fn resolved_config_path(output: &Path) -> PathBuf {
    output.with_extension("resolved.json")
}

pub fn write_resolved(config: &ExperimentConfig, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(&config.resolved()?).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
