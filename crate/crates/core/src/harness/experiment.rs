//! Repeated independent runs of one configuration.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::TrajectorySeries;
use crate::dynamics::run;
use crate::error::{CboError, Result};
use crate::objectives::Objective;
use crate::par;
use crate::paramcheck::{validate_all, GrowthConstants, ParamReport};

use super::config::ExperimentConfig;

/// Result of one run. Equality ignores `wall_time`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub config_hash: String,
    /// Final consensus point; `None` when the run diverged.
    pub final_consensus: Option<Vec<f64>>,
    pub final_distance: Option<f64>,
    pub success: bool,
    /// Step at which the run diverged.
    pub diverged_at: Option<usize>,
    pub series: Vec<TrajectorySeries>,
    /// Seconds.
    pub wall_time: f64,
}

impl PartialEq for RunRecord {
    fn eq(&self, other: &Self) -> bool {
        self.run == other.run
            && self.seed == other.seed
            && self.config_hash == other.config_hash
            && self.final_consensus == other.final_consensus
            && self.final_distance == other.final_distance
            && self.success == other.success
            && self.diverged_at == other.diverged_at
            && self.series == other.series
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub runs: usize,
    pub successes: usize,
    pub divergences: usize,
    pub success_rate: f64,
    /// Mean final distance over the runs that did not diverge.
    pub mean_final_distance: Option<f64>,
}

impl ExperimentSummary {
    pub fn from_records(records: &[RunRecord]) -> Self {
        let runs = records.len();
        let successes = records.iter().filter(|r| r.success).count();
        let divergences = records.iter().filter(|r| r.diverged_at.is_some()).count();
        let dists: Vec<f64> = records.iter().filter_map(|r| r.final_distance).collect();
        ExperimentSummary {
            runs,
            successes,
            divergences,
            success_rate: if runs == 0 { 0.0 } else { successes as f64 / runs as f64 },
            mean_final_distance: if dists.is_empty() {
                None
            } else {
                Some(dists.iter().sum::<f64>() / dists.len() as f64)
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub records: Vec<RunRecord>,
    pub summary: ExperimentSummary,
    /// Parameter-check report, when growth constants are known.
    pub check: Option<ParamReport>,
}

/// Parameter report for `cfg`, using `[check]` overrides where given.
pub fn param_report(cfg: &ExperimentConfig, obj: &Objective) -> Option<ParamReport> {
    let check = cfg.check.clone().unwrap_or_default();
    let growth = check.growth.or(obj.growth())?;
    let g = GrowthConstants::new(growth, cfg.params.alpha);
    Some(validate_all(&cfg.params, &g, obj.dim(), check.l_m))
}

/// One run with sweep semantics: divergence is a failed run, not an error.
pub(crate) fn single_run(cfg: &ExperimentConfig, obj: &Objective, run_index: usize, seed: u64) -> Result<RunRecord> {
    let start = Instant::now();
    let out = run(&cfg.init, cfg.particles, &cfg.params, obj, seed, &cfg.record, cfg.tolerance);
    let wall_time = start.elapsed().as_secs_f64();
    let mut record = RunRecord {
        run: run_index,
        seed,
        config_hash: cfg.config_hash(seed),
        final_consensus: None,
        final_distance: None,
        success: false,
        diverged_at: None,
        series: Vec::new(),
        wall_time,
    };
    match out {
        Ok(summary) => {
            record.final_consensus = Some(summary.final_consensus.point);
            record.final_distance = summary.final_distance;
            record.success = summary.success.unwrap_or(false);
            record.series = summary.series;
        }
        Err(CboError::Diverged { step, .. }) => record.diverged_at = Some(step),
        Err(e) => return Err(e),
    }
    Ok(record)
}

/// Runs `cfg.runs` simulations with seeds `cfg.seed + 0 .. cfg.seed + runs - 1`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let obj = cfg.validate()?;
    let check = param_report(cfg, &obj);
    let records = par::map_collect(cfg.runs, |r| single_run(cfg, &obj, r, cfg.seed.wrapping_add(r as u64)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let summary = ExperimentSummary::from_records(&records);
    Ok(ExperimentOutcome { records, summary, check })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::CboParams;
    use crate::ensemble::InitSpec;
    use crate::harness::config::ObjectiveConfig;

    fn quadratic_cfg() -> ExperimentConfig {
        ExperimentConfig {
            particles: 50,
            runs: 3,
            seed: 11,
            tolerance: 0.05,
            output: None,
            objective: ObjectiveConfig {
                name: "quadratic".into(),
                dim: Some(1),
                shift: None,
                center: Some(vec![0.0]),
            },
            init: InitSpec::uniform(vec![-1.0], vec![1.0]),
            params: CboParams {
                lambda: 1.0,
                sigma: 0.2,
                alpha: 1e15,
                kappa: 0.5,
                delta: 0.1,
                dt: 0.01,
                n_steps: 300,
            },
            record: Default::default(),
            sweep: None,
            probe: None,
            check: None,
        }
    }

    #[test]
    fn runs_use_sequential_seeds_and_are_reproducible() {
        let cfg = quadratic_cfg();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        let seeds: Vec<u64> = a.records.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, vec![11, 12, 13]);
        assert_eq!(a.records[0].config_hash, cfg.config_hash(11));
        assert_eq!(a.summary.runs, 3);
        assert_eq!(a.summary.success_rate, 1.0);
        assert!(a.check.is_some());
    }

    #[test]
    fn divergence_is_a_failure() {
        let mut cfg = quadratic_cfg();
        cfg.params.sigma = 1e150;
        cfg.params.delta = 1e150;
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.summary.divergences, 3);
        assert_eq!(out.summary.successes, 0);
        assert_eq!(out.summary.mean_final_distance, None);
        assert!(out.records.iter().all(|r| r.final_consensus.is_none()));
    }

    #[test]
    fn bad_names_fail_before_running() {
        let mut cfg = quadratic_cfg();
        cfg.objective.name = "parabola".into();
        assert!(matches!(run_experiment(&cfg), Err(CboError::Config { .. })));
    }

    #[test]
    fn equality_ignores_wall_time() {
        let cfg = quadratic_cfg();
        let obj = cfg.validate().unwrap();
        let a = single_run(&cfg, &obj, 0, 5).unwrap();
        let mut b = a.clone();
        b.wall_time += 10.0;
        assert_eq!(a, b);
    }
}
