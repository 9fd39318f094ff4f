//! Euler-Maruyama integration of the rescaled CBO particle system.
//!
//! One step, with `m` the consensus point of the pre-step ensemble and
//! `y = x_i[k] - kappa * m[k]`:
//!
//! ```text
//! x_i[k] <- x_i[k] - lambda * y * dt + sigma * (delta + |y|) * sqrt(dt) * xi_{i,k}
//! ```
//!
//! `m` is computed once per step, so no particle sees another particle's
//! post-step position.

use serde::{Deserialize, Serialize};

use crate::consensus::{consensus_point, ConsensusPoint};
use crate::diagnostics::{dist_to_set, TrajectorySeries};
use crate::ensemble::{init_ensemble, Ensemble, InitSpec};
use crate::error::{CboError, Result};
use crate::objectives::{MinimizerSet, Objective};
use crate::par;
use crate::rng::RngStream;

/// Default success tolerance on the distance to the minimizer set.
pub const DEFAULT_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CboParams {
    /// drift rate
    pub lambda: f64,
    /// noise scale
    pub sigma: f64,
    /// inverse temperature of the consensus weights
    pub alpha: f64,
    /// consensus rescaling
    pub kappa: f64,
    /// diffusion regularizer
    pub delta: f64,
    pub dt: f64,
    #[serde(rename = "steps")]
    pub n_steps: usize,
}

impl CboParams {
    /// Time horizon `dt * n_steps`.
    pub fn horizon(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    /// Number of steps covering `horizon` at step `dt`.
    pub fn steps_for(horizon: f64, dt: f64) -> usize {
        (horizon / dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("params.lambda", self.lambda),
            ("params.sigma", self.sigma),
            ("params.alpha", self.alpha),
            ("params.kappa", self.kappa),
            ("params.delta", self.delta),
            ("params.dt", self.dt),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(CboError::config(name, format!("must be finite, got {v}")));
            }
        }
        if self.lambda <= 0.0 {
            return Err(CboError::config("params.lambda", "must be positive"));
        }
        if self.sigma < 0.0 {
            return Err(CboError::config("params.sigma", "must be non-negative"));
        }
        if self.alpha < 0.0 {
            return Err(CboError::config("params.alpha", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(CboError::config("params.kappa", format!("must lie in [0, 1], got {}", self.kappa)));
        }
        if self.delta < 0.0 {
            return Err(CboError::config("params.delta", "must be non-negative"));
        }
        if self.dt <= 0.0 {
            return Err(CboError::config("params.dt", "must be positive"));
        }
        Ok(())
    }

    fn echo(&self) -> String {
        format!(
            "lambda={:?} sigma={:?} alpha={:?} kappa={:?} delta={:?} dt={:?}",
            self.lambda, self.sigma, self.alpha, self.kappa, self.delta, self.dt
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: usize,
    /// Consensus point of the pre-step ensemble, used by every particle.
    pub consensus: ConsensusPoint,
    /// `(1/N) sum |x_i|^2` after the step.
    pub second_moment: f64,
    /// Particle mean after the step.
    pub mean: Vec<f64>,
}

/// Advances `ens` by one Euler-Maruyama step.
///
/// The objective cache must be fresh on entry; it is refreshed on exit.
pub fn em_step(
    ens: &mut Ensemble,
    params: &CboParams,
    obj: &Objective,
    stream: &RngStream,
    step: usize,
) -> Result<StepReport> {
    let consensus = consensus_point(ens, params.alpha)?;
    let d = ens.dim();
    let target: Vec<f64> = consensus.point.iter().map(|m| params.kappa * m).collect();
    let drift = params.lambda * params.dt;
    let noise = params.sigma * params.dt.sqrt();
    par::for_each_row_mut(ens.positions_mut(), d, |i, row| {
        stream.for_each_normal(i, step, |k, z| {
            let y = row[k] - target[k];
            row[k] -= drift * y - noise * (params.delta + y.abs()) * z;
        });
    });
    if let Some((particle, _)) = ens.first_non_finite() {
        return Err(CboError::Diverged {
            step,
            particle,
            params: params.echo(),
        });
    }
    ens.evaluate(obj)?;
    if let Some(particle) = ens.fvalues()?.iter().position(|f| !f.is_finite()) {
        return Err(CboError::Diverged {
            step,
            particle,
            params: params.echo(),
        });
    }
    Ok(StepReport {
        step,
        consensus,
        second_moment: ens.second_moment(),
        mean: ens.mean(),
    })
}

/// A single simulation: the ensemble, its parameters and the noise stream.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    ens: Ensemble,
    params: CboParams,
    obj: &'a Objective,
    stream: RngStream,
    step: usize,
}

impl<'a> Simulation<'a> {
    /// Samples `n` particles from `init` and evaluates them. `seed` drives both
    /// the initial sample and the noise.
    pub fn new(init: &InitSpec, n: usize, params: CboParams, obj: &'a Objective, seed: u64) -> Result<Self> {
        params.validate()?;
        let ens = init_ensemble(init, n, obj.dim(), seed)?;
        Self::from_ensemble(ens, params, obj, seed)
    }

    pub fn from_ensemble(mut ens: Ensemble, params: CboParams, obj: &'a Objective, seed: u64) -> Result<Self> {
        params.validate()?;
        ens.evaluate(obj)?;
        Ok(Simulation {
            stream: RngStream::new(seed, ens.dim()),
            ens,
            params,
            obj,
            step: 0,
        })
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ens
    }

    pub fn params(&self) -> &CboParams {
        &self.params
    }

    /// Steps taken so far.
    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.params.dt
    }

    /// Consensus point of the current ensemble.
    pub fn consensus(&self) -> Result<ConsensusPoint> {
        consensus_point(&self.ens, self.params.alpha)
    }

    pub fn step(&mut self) -> Result<StepReport> {
        let report = em_step(&mut self.ens, &self.params, self.obj, &self.stream, self.step)?;
        self.step += 1;
        Ok(report)
    }
}

/// Which per-step series a run keeps. Everything is off by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Recording {
    pub consensus: bool,
    pub second_moment: bool,
    pub log_error: bool,
    /// Keep every `every`-th sample (time 0 and the final time are always kept).
    pub every: usize,
}

impl Default for Recording {
    fn default() -> Self {
        Recording {
            consensus: false,
            second_moment: false,
            log_error: false,
            every: 1,
        }
    }
}

impl Recording {
    pub fn all() -> Self {
        Recording {
            consensus: true,
            second_moment: true,
            log_error: true,
            every: 1,
        }
    }

    fn any(&self) -> bool {
        self.consensus || self.second_moment || self.log_error
    }
}

pub const SERIES_CONSENSUS: &str = "consensus";
pub const SERIES_SECOND_MOMENT: &str = "second_moment";
pub const SERIES_LOG_ERROR: &str = "log_error";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// Consensus point of the ensemble at the final time.
    pub final_consensus: ConsensusPoint,
    pub final_mean: Vec<f64>,
    pub final_second_moment: f64,
    pub final_variance: f64,
    pub initial_second_moment: f64,
    pub initial_variance: f64,
    /// Distance from the final consensus to the minimizer set, when known.
    pub final_distance: Option<f64>,
    /// [`success_test`] result, when minimizers are known.
    pub success: Option<bool>,
    pub series: Vec<TrajectorySeries>,
}

impl RunSummary {
    pub fn series(&self, label: &str) -> Option<&TrajectorySeries> {
        self.series.iter().find(|s| s.label == label)
    }
}

/// Runs `params.n_steps` steps from `n` particles drawn from `init`.
pub fn run(
    init: &InitSpec,
    n: usize,
    params: &CboParams,
    obj: &Objective,
    seed: u64,
    record: &Recording,
    tolerance: f64,
) -> Result<RunSummary> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(CboError::config("tolerance", "must be positive"));
    }
    let mut sim = Simulation::new(init, n, *params, obj, seed)?;
    let every = record.every.max(1);
    let minimizers = obj.minimizers();
    let mut consensus_series = TrajectorySeries::new(SERIES_CONSENSUS);
    let mut moment_series = TrajectorySeries::new(SERIES_SECOND_MOMENT);
    let mut error_series = TrajectorySeries::new(SERIES_LOG_ERROR);
    let log_error = |c: &ConsensusPoint, set: Option<&MinimizerSet>| set.map(|s| dist_to_set(&c.point, s).ln());

    let initial_second_moment = sim.ensemble().second_moment();
    let initial_variance = sim.ensemble().variance();
    if record.second_moment {
        moment_series.push(0.0, vec![initial_second_moment]);
    }
    for k in 0..params.n_steps {
        let report = sim.step()?;
        let keep = k % every == 0;
        if keep {
            let t = k as f64 * params.dt;
            if record.consensus {
                consensus_series.push(t, report.consensus.point.clone());
            }
            if record.log_error {
                if let Some(e) = log_error(&report.consensus, minimizers) {
                    error_series.push(t, vec![e]);
                }
            }
        }
        if record.second_moment && ((k + 1) % every == 0 || k + 1 == params.n_steps) {
            moment_series.push(sim.time(), vec![report.second_moment]);
        }
    }
    let final_consensus = sim.consensus()?;
    let t_end = sim.time();
    if record.consensus && consensus_series.last_time() != Some(t_end) {
        consensus_series.push(t_end, final_consensus.point.clone());
    }
    if record.log_error && error_series.last_time() != Some(t_end) {
        if let Some(e) = log_error(&final_consensus, minimizers) {
            error_series.push(t_end, vec![e]);
        }
    }
    let mut series = Vec::new();
    if record.any() {
        for (on, s) in [
            (record.consensus, consensus_series),
            (record.second_moment, moment_series),
            (record.log_error && minimizers.is_some(), error_series),
        ] {
            if on {
                series.push(s);
            }
        }
    }
    let final_distance = minimizers.map(|set| dist_to_set(&final_consensus.point, set));
    let success = minimizers.map(|set| success_test(&final_consensus.point, set, tolerance));
    let ens = sim.ensemble();
    Ok(RunSummary {
        final_mean: ens.mean(),
        final_second_moment: ens.second_moment(),
        final_variance: ens.variance(),
        initial_second_moment,
        initial_variance,
        final_distance,
        success,
        series,
        final_consensus,
    })
}

/// `dist(consensus, minimizers) < tol`.
pub fn success_test(consensus: &[f64], minimizers: &MinimizerSet, tol: f64) -> bool {
    dist_to_set(consensus, minimizers) < tol
}
