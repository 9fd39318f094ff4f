//! TOML experiment configuration.
//!
//! ```toml
//! particles = 100
//! runs = 20
//! seed = 0
//! tolerance = 0.05
//! output = "fig1.csv"
//!
//! [objective]
//! name = "rastrigin1d"        # rastrigin1d | rastrigin | ackley | biminimizer | quadratic
//!
//! [init]
//! kind = "uniform-box"        # uniform-box {lo, hi} | gaussian {mean, var} | dirac {point}
//! lo = [2.0]
//! hi = [5.0]
//!
//! [params]
//! lambda = 1.0
//! sigma = 0.5
//! alpha = 1e15
//! kappa = 0.01
//! delta = 5.0
//! dt = 0.01
//! steps = 10000
//!
//! [record]                    # optional per-run series
//! consensus = true
//! every = 100
//!
//! [sweep]                     # used by `sweep`
//! kappa = [0.1, 0.5, 0.9]
//! delta = [0.5, 1.0]
//! runs = 30
//!
//! [probe]                     # used by `probe`
//! kind = "contraction"        # contraction | invariant-mean | moments
//! seeds = 20
//! checkpoints = [0.0, 5.0, 10.0]
//! init_b = { kind = "dirac", point = [0.0] }
//!
//! [check]                     # used by `check-params`
//! l_m = 1.0
//! ```
//!
//! Top-level keys have to come before the first table, as TOML requires.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{CboParams, Recording, DEFAULT_TOLERANCE};
use crate::ensemble::InitSpec;
use crate::error::{CboError, Result};
use crate::objectives::{GrowthBounds, Objective};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
}

impl ObjectiveConfig {
    pub fn named(name: &str) -> Self {
        ObjectiveConfig {
            name: name.into(),
            dim: None,
            shift: None,
            center: None,
        }
    }

    fn resolve_vector(&self, key: &str, given: &Option<Vec<f64>>, fill: f64) -> Result<Vec<f64>> {
        match (given, self.dim) {
            (Some(v), Some(d)) if v.len() != d => Err(CboError::config(
                format!("objective.{key}"),
                format!("has {} entries but dim = {d}", v.len()),
            )),
            (Some(v), _) if v.is_empty() => Err(CboError::config(format!("objective.{key}"), "must not be empty")),
            (Some(v), _) => Ok(v.clone()),
            (None, Some(0)) => Err(CboError::config("objective.dim", "must be at least 1")),
            (None, Some(d)) => Ok(vec![fill; d]),
            (None, None) => Err(CboError::config("objective.dim", format!("required for '{}'", self.name))),
        }
    }

    fn forbid(&self, key: &str, present: bool) -> Result<()> {
        if present {
            return Err(CboError::config(format!("objective.{key}"), format!("not used by '{}'", self.name)));
        }
        Ok(())
    }

    fn fixed_dim(&self, d: usize) -> Result<()> {
        match self.dim {
            Some(k) if k != d => Err(CboError::config("objective.dim", format!("'{}' is {d}-dimensional", self.name))),
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Result<Objective> {
        match self.name.as_str() {
            "rastrigin1d" => {
                self.fixed_dim(1)?;
                self.forbid("shift", self.shift.is_some())?;
                self.forbid("center", self.center.is_some())?;
                Ok(Objective::rastrigin_1d())
            }
            "rastrigin" => {
                self.forbid("center", self.center.is_some())?;
                Ok(Objective::rastrigin_shifted(self.resolve_vector("shift", &self.shift, 0.0)?))
            }
            "ackley" => {
                self.forbid("center", self.center.is_some())?;
                Ok(Objective::ackley_shifted(self.resolve_vector("shift", &self.shift, 1.0)?))
            }
            "biminimizer" => {
                self.fixed_dim(2)?;
                self.forbid("shift", self.shift.is_some())?;
                self.forbid("center", self.center.is_some())?;
                Ok(Objective::biminimizer_2d())
            }
            "quadratic" => {
                self.forbid("shift", self.shift.is_some())?;
                Ok(Objective::quadratic(self.resolve_vector("center", &self.center, 0.0)?))
            }
            other => Err(CboError::config(
                "objective.name",
                format!("unknown objective '{other}' (expected rastrigin1d, rastrigin, ackley, biminimizer or quadratic)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    pub kappa: Vec<f64>,
    pub delta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particles: Option<Vec<usize>>,
    /// Runs per cell; defaults to the top-level `runs`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
}

fn default_tail() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProbeConfig {
    /// W2 between a run from `init` and a run from `init_b`.
    Contraction {
        init_b: InitSpec,
        seeds: usize,
        checkpoints: Vec<f64>,
        /// Drive both copies with the same seed.
        #[serde(default)]
        shared_noise: bool,
    },
    /// Tail averages of the particle mean versus `kappa * m`.
    InvariantMean {
        seeds: usize,
        #[serde(default = "default_tail")]
        tail_fraction: f64,
    },
    /// Seed-averaged second-moment series against `initial + C2`.
    Moments { seeds: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    /// Stability constant of the consensus map; enables the contraction check.
    #[serde(default)]
    pub l_m: Option<f64>,
    /// Growth constants overriding the objective's defaults.
    #[serde(default)]
    pub growth: Option<GrowthBounds>,
}

fn default_runs() -> usize {
    1
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub particles: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub objective: ObjectiveConfig,
    pub init: InitSpec,
    pub params: CboParams,
    #[serde(default)]
    pub record: Recording,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxes>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CboError::config("config", e.to_string()))
    }

    /// Reads a config file. A missing or malformed file is a config error
    /// naming the path.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CboError::config(path.display().to_string(), format!("cannot read config: {e}")))?;
        Self::from_toml(&text).map_err(|e| match e {
            CboError::Config { message, .. } => CboError::config(path.display().to_string(), message),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks everything a run needs and builds the objective.
    pub fn validate(&self) -> Result<Objective> {
        let obj = self.objective.build()?;
        if self.particles == 0 {
            return Err(CboError::config("particles", "must be at least 1"));
        }
        if self.runs == 0 {
            return Err(CboError::config("runs", "must be at least 1"));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(CboError::config("tolerance", "must be positive"));
        }
        self.init.validate(obj.dim())?;
        self.params.validate()?;
        Ok(obj)
    }

    /// Identifies `(config, seed)`: a digest of the fields that determine a
    /// run's result. Independent of key order in the source file, the output
    /// path and the run count.
    pub fn config_hash(&self, seed: u64) -> String {
        #[derive(Serialize)]
        struct Key<'a> {
            objective: &'a ObjectiveConfig,
            init: &'a InitSpec,
            params: &'a CboParams,
            particles: usize,
            tolerance: f64,
            record: &'a Recording,
            seed: u64,
        }
        let key = Key {
            objective: &self.objective,
            init: &self.init,
            params: &self.params,
            particles: self.particles,
            tolerance: self.tolerance,
            record: &self.record,
            seed,
        };
        let bytes = serde_json::to_vec(&key).expect("hash key serializes");
        let digest = Sha256::digest(&bytes);
        digest[..16].iter().map(|b| format!("{b:02x}")).collect()
    }
}
