//! Law-level measurements: distances to minimizer sets, the exact
//! one-dimensional Wasserstein-2 distance, and probes of the long-time
//! behaviour (contraction between two runs, stationary-mean identity,
//! second-moment series).

use serde::{Deserialize, Serialize};

use crate::consensus::consensus_point;
use crate::dynamics::{CboParams, RunSummary, Simulation, SERIES_SECOND_MOMENT};
use crate::ensemble::InitSpec;
use crate::error::{CboError, Result};
use crate::objectives::{MinimizerSet, Objective};
use crate::par;

/// A labelled time series. Each value is a scalar (length 1) or a d-vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl TrajectorySeries {
    pub fn new(label: impl Into<String>) -> Self {
        TrajectorySeries {
            label: label.into(),
            times: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Appends a sample. Times must be strictly increasing.
    pub fn push(&mut self, t: f64, value: Vec<f64>) {
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        self.values.push(value);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    /// First component of every value.
    pub fn scalars(&self) -> Vec<f64> {
        self.values.iter().map(|v| v[0]).collect()
    }
}

/// Euclidean distance from `x` to the nearest member of `set`.
/// Boxes are handled by per-axis clamping.
pub fn dist_to_set(x: &[f64], set: &MinimizerSet) -> f64 {
    let sq = match set {
        MinimizerSet::Points(points) => points
            .iter()
            .map(|p| x.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
            .fold(f64::INFINITY, f64::min),
        MinimizerSet::Boxes(boxes) => boxes
            .iter()
            .map(|b| {
                x.iter()
                    .zip(b)
                    .map(|(a, [lo, hi])| (a - a.clamp(*lo, *hi)).powi(2))
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min),
    };
    sq.sqrt()
}

/// Exact `W2` between two equal-size one-dimensional empirical measures:
/// `sqrt((1/N) sum_i (a_(i) - b_(i))^2)` over order statistics. Inputs need
/// not be sorted.
pub fn w2_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(CboError::Input(format!("sample sizes differ: {} vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(CboError::Input("empty samples".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Ok(w2_1d_sorted(&a, &b))
}

/// [`w2_1d`] for inputs already in ascending order.
pub fn w2_1d_sorted(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (s / a.len() as f64).sqrt()
}

fn checkpoint_steps(params: &CboParams, checkpoints: &[f64]) -> Result<Vec<usize>> {
    if checkpoints.is_empty() {
        return Err(CboError::config("probe.checkpoints", "need at least one checkpoint"));
    }
    let steps: Vec<usize> = checkpoints.iter().map(|&t| CboParams::steps_for(t, params.dt)).collect();
    if steps.windows(2).any(|w| w[1] <= w[0]) || checkpoints.iter().any(|t| t.is_nan() || *t < 0.0) {
        return Err(CboError::config("probe.checkpoints", "times must be non-negative and strictly increasing"));
    }
    if *steps.last().unwrap() > params.n_steps {
        return Err(CboError::config("probe.checkpoints", "last checkpoint is beyond the run horizon"));
    }
    Ok(steps)
}

fn mean_over_seeds(per_seed: Vec<Vec<f64>>) -> Vec<f64> {
    let s = per_seed.len() as f64;
    let width = per_seed[0].len();
    (0..width).map(|k| per_seed.iter().map(|v| v[k]).sum::<f64>() / s).collect()
}

/// `W2(ensA(t), ensB(t))` at each checkpoint, averaged over seed pairs.
///
/// Both ensembles follow the same parameters; the pair `(seed_a, seed_b)`
/// drives their initial samples and noise. Equal seeds and equal initial
/// laws give identical processes. Only one-dimensional objectives.
#[allow(clippy::too_many_arguments)]
pub fn contraction_probe(
    params: &CboParams,
    obj: &Objective,
    init_a: &InitSpec,
    init_b: &InitSpec,
    n: usize,
    seeds: &[(u64, u64)],
    checkpoints: &[f64],
) -> Result<TrajectorySeries> {
    if obj.dim() != 1 {
        return Err(CboError::UnsupportedDimension {
            expected: 1,
            got: obj.dim(),
        });
    }
    if seeds.is_empty() {
        return Err(CboError::config("probe.seeds", "need at least one seed"));
    }
    let steps = checkpoint_steps(params, checkpoints)?;
    let per_seed = par::map_collect(seeds.len(), |s| -> Result<Vec<f64>> {
        let (sa, sb) = seeds[s];
        let mut a = Simulation::new(init_a, n, *params, obj, sa)?;
        let mut b = Simulation::new(init_b, n, *params, obj, sb)?;
        let mut out = Vec::with_capacity(steps.len());
        for &target in &steps {
            while a.steps_taken() < target {
                a.step()?;
                b.step()?;
            }
            out.push(w2_1d(a.ensemble().positions(), b.ensemble().positions())?);
        }
        Ok(out)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut series = TrajectorySeries::new("w2");
    for (t, v) in checkpoints.iter().zip(mean_over_seeds(per_seed)) {
        series.push(*t, vec![v]);
    }
    Ok(series)
}

/// Tail averages of the particle mean and the consensus point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantMeanReport {
    /// Seed average of `mean_tail - kappa * consensus_tail`, per axis.
    pub residual: Vec<f64>,
    /// Standard error of `residual` across seeds, per axis.
    pub residual_se: Vec<f64>,
    /// Seed-and-time averaged particle mean.
    pub mean: Vec<f64>,
    /// Seed-and-time averaged consensus point.
    pub consensus: Vec<f64>,
    /// `mean / kappa`
    pub rescaled_mean: Vec<f64>,
    /// Standard error of `mean` across seeds.
    pub mean_se: Vec<f64>,
    pub seeds: usize,
    pub tail_steps: (usize, usize),
}

/// Runs one simulation per seed and averages, over steps in
/// `tail.0..tail.1` (ensemble states after that many steps), the particle
/// mean and the consensus point. At stationarity the identity
/// `E[mean] = kappa * E[m]` makes the residual vanish.
pub fn invariant_mean_probe(
    params: &CboParams,
    obj: &Objective,
    init: &InitSpec,
    n: usize,
    seeds: &[u64],
    tail: (usize, usize),
) -> Result<InvariantMeanReport> {
    let (lo, hi) = tail;
    if lo >= hi || hi > params.n_steps + 1 {
        return Err(CboError::config(
            "probe.tail",
            format!("window {lo}..{hi} must be non-empty and within 0..={}", params.n_steps),
        ));
    }
    if seeds.is_empty() {
        return Err(CboError::config("probe.seeds", "need at least one seed"));
    }
    let d = obj.dim();
    // per seed: [mean_0..mean_d, m_0..m_d]
    let per_seed = par::map_collect(seeds.len(), |s| -> Result<Vec<f64>> {
        let mut sim = Simulation::new(init, n, *params, obj, seeds[s])?;
        let mut acc = vec![0.0; 2 * d];
        loop {
            let k = sim.steps_taken();
            if k >= lo {
                let mean = sim.ensemble().mean();
                let m = consensus_point(sim.ensemble(), params.alpha)?.point;
                for j in 0..d {
                    acc[j] += mean[j];
                    acc[d + j] += m[j];
                }
            }
            if k + 1 >= hi {
                break;
            }
            sim.step()?;
        }
        let count = (hi - lo) as f64;
        Ok(acc.into_iter().map(|v| v / count).collect())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let s = per_seed.len() as f64;
    let stats = |f: &dyn Fn(&[f64]) -> f64| {
        let vals: Vec<f64> = per_seed.iter().map(|v| f(v)).collect();
        let mean = vals.iter().sum::<f64>() / s;
        let se = if per_seed.len() > 1 {
            (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (s - 1.0) / s).sqrt()
        } else {
            0.0
        };
        (mean, se)
    };
    let kappa = params.kappa;
    let mut report = InvariantMeanReport {
        residual: Vec::with_capacity(d),
        residual_se: Vec::with_capacity(d),
        mean: Vec::with_capacity(d),
        consensus: Vec::with_capacity(d),
        rescaled_mean: Vec::with_capacity(d),
        mean_se: Vec::with_capacity(d),
        seeds: seeds.len(),
        tail_steps: tail,
    };
    for j in 0..d {
        let (r, r_se) = stats(&|v| v[j] - kappa * v[d + j]);
        let (m, m_se) = stats(&|v| v[j]);
        let (c, _) = stats(&|v| v[d + j]);
        report.residual.push(r);
        report.residual_se.push(r_se);
        report.mean.push(m);
        report.mean_se.push(m_se);
        report.consensus.push(c);
        report.rescaled_mean.push(if kappa > 0.0 { m / kappa } else { f64::NAN });
    }
    Ok(report)
}

/// Default stationarity window: the last `fraction` of the steps.
pub fn tail_window(n_steps: usize, fraction: f64) -> (usize, usize) {
    let len = ((n_steps as f64) * fraction).round().max(1.0) as usize;
    (n_steps + 1 - len.min(n_steps + 1), n_steps + 1)
}

/// Second-moment series of a run, with the uniform-bound constant attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSeries {
    pub series: TrajectorySeries,
    /// `C2` of the uniform second-moment bound, if known.
    pub c2: Option<f64>,
}

impl MomentSeries {
    /// `initial + C2`, the level the series should stay below in expectation.
    pub fn bound(&self) -> Option<f64> {
        self.c2.map(|c| self.series.values[0][0] + c)
    }
}

pub fn moment_series(record: &RunSummary, c2: Option<f64>) -> Result<MomentSeries> {
    let series = record
        .series(SERIES_SECOND_MOMENT)
        .ok_or_else(|| CboError::AbsentData("second-moment series".into()))?
        .clone();
    Ok(MomentSeries { series, c2 })
}
