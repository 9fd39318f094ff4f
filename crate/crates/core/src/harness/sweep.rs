//! Success-rate grids over `(delta, kappa)` and optionally the particle count.

use serde::{Deserialize, Serialize};

use crate::error::{CboError, Result};
use crate::par;
use crate::rng::derive_seed;

use super::config::ExperimentConfig;
use super::experiment::single_run;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    pub kappa: Vec<f64>,
    pub delta: Vec<f64>,
    pub particles: Option<Vec<usize>>,
    pub runs_per_cell: usize,
}

impl SweepSpec {
    /// Builds a sweep from the `[sweep]` section of `cfg`.
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let axes = cfg
            .sweep
            .as_ref()
            .ok_or_else(|| CboError::config("sweep", "config has no [sweep] section"))?;
        let spec = SweepSpec {
            base: cfg.clone(),
            kappa: axes.kappa.clone(),
            delta: axes.delta.clone(),
            particles: axes.particles.clone(),
            runs_per_cell: axes.runs.unwrap_or(cfg.runs),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa.is_empty() {
            return Err(CboError::config("sweep.kappa", "must not be empty"));
        }
        if self.delta.is_empty() {
            return Err(CboError::config("sweep.delta", "must not be empty"));
        }
        if matches!(&self.particles, Some(p) if p.is_empty()) {
            return Err(CboError::config("sweep.particles", "must not be empty"));
        }
        if self.runs_per_cell == 0 {
            return Err(CboError::config("sweep.runs", "must be at least 1"));
        }
        for cfg in self.cell_configs() {
            cfg.validate()?;
        }
        Ok(())
    }

    /// Cells in table order: particles, then delta, then kappa.
    fn cells(&self) -> Vec<(Option<usize>, f64, f64)> {
        let ns: Vec<Option<usize>> = match &self.particles {
            Some(p) => p.iter().map(|&n| Some(n)).collect(),
            None => vec![None],
        };
        let mut out = Vec::new();
        for &n in &ns {
            for &delta in &self.delta {
                for &kappa in &self.kappa {
                    out.push((n, delta, kappa));
                }
            }
        }
        out
    }

    fn cell_configs(&self) -> Vec<ExperimentConfig> {
        self.cells()
            .into_iter()
            .map(|(n, delta, kappa)| {
                let mut cfg = self.base.clone();
                cfg.params.delta = delta;
                cfg.params.kappa = kappa;
                if let Some(n) = n {
                    cfg.particles = n;
                }
                cfg.runs = self.runs_per_cell;
                cfg.sweep = None;
                cfg
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub particles: Option<usize>,
    pub delta: f64,
    pub kappa: f64,
    pub runs: usize,
    pub successes: usize,
    pub divergences: usize,
}

impl SweepCell {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.runs as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    pub fn get(&self, delta: f64, kappa: f64) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.delta == delta && c.kappa == kappa)
    }

    pub fn has_particles(&self) -> bool {
        self.cells.iter().any(|c| c.particles.is_some())
    }

    /// Pools two tables over the same grid run on disjoint seed ranges.
    pub fn merge(&self, other: &SweepTable) -> Result<SweepTable> {
        if self.cells.len() != other.cells.len() {
            return Err(CboError::Input("tables have different grids".into()));
        }
        let cells = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| {
                if (a.particles, a.delta, a.kappa) != (b.particles, b.delta, b.kappa) {
                    return Err(CboError::Input("tables have different grids".into()));
                }
                Ok(SweepCell {
                    runs: a.runs + b.runs,
                    successes: a.successes + b.successes,
                    divergences: a.divergences + b.divergences,
                    ..a.clone()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepTable { cells })
    }

    /// Rates laid out with delta rows and kappa columns, one block per
    /// particle count.
    pub fn grid_text(&self) -> String {
        fn distinct<T: PartialEq + Copy>(it: impl Iterator<Item = T>) -> Vec<T> {
            let mut out = Vec::new();
            for v in it {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
            out
        }
        let kappas = distinct(self.cells.iter().map(|c| c.kappa));
        let mut out = String::new();
        for n in distinct(self.cells.iter().map(|c| c.particles)) {
            if let Some(n) = n {
                out.push_str(&format!("N = {n}\n"));
            }
            out.push_str(&format!("{:>8}", "delta"));
            for k in &kappas {
                out.push_str(&format!(" {:>6}", format!("k={k}")));
            }
            out.push('\n');
            let block: Vec<&SweepCell> = self.cells.iter().filter(|c| c.particles == n).collect();
            for delta in distinct(block.iter().map(|c| c.delta)) {
                out.push_str(&format!("{delta:>8}"));
                for c in block.iter().filter(|c| c.delta == delta) {
                    out.push_str(&format!(" {:>6.2}", c.rate()));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Runs every cell. Cell `c` uses seeds `derive_seed(base, c) + r` for runs
/// `r = 0 .. runs_per_cell - 1`; divergent runs count as failures.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let cells = spec.cells();
    let configs = spec.cell_configs();
    let objectives = configs.iter().map(|c| c.validate()).collect::<Result<Vec<_>>>()?;
    let runs = spec.runs_per_cell;
    let base = spec.base.seed;
    let outcomes = par::map_collect(cells.len() * runs, |job| {
        let (cell, r) = (job / runs, job % runs);
        let seed = derive_seed(base, cell as u64).wrapping_add(r as u64);
        single_run(&configs[cell], &objectives[cell], r, seed).map(|rec| (rec.success, rec.diverged_at.is_some()))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let table = cells
        .iter()
        .enumerate()
        .map(|(i, &(particles, delta, kappa))| {
            let chunk = &outcomes[i * runs..(i + 1) * runs];
            SweepCell {
                particles,
                delta,
                kappa,
                runs,
                successes: chunk.iter().filter(|o| o.0).count(),
                divergences: chunk.iter().filter(|o| o.1).count(),
            }
        })
        .collect();
    Ok(SweepTable { cells: table })
}
