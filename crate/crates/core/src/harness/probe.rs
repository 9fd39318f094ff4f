//! Config-driven wrappers around the diagnostics probes.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{contraction_probe, invariant_mean_probe, tail_window, InvariantMeanReport, TrajectorySeries};
use crate::dynamics::{run, Recording, SERIES_SECOND_MOMENT};
use crate::error::{CboError, Result};
use crate::par;
use crate::paramcheck::{compute_b_constants, compute_gamma_c2, GrowthConstants};
use crate::rng::derive_seed;

use super::config::{ExperimentConfig, ProbeConfig};

/// Seeds `base, base + 1, ...`.
pub fn seed_list(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| base.wrapping_add(i)).collect()
}

/// Seed pairs for the contraction probe. Without shared noise the second
/// copy's seed is derived from the first.
pub fn contraction_seeds(base: u64, count: usize, shared_noise: bool) -> Vec<(u64, u64)> {
    seed_list(base, count)
        .into_iter()
        .map(|s| (s, if shared_noise { s } else { derive_seed(s, 1) }))
        .collect()
}

/// Seed-averaged second moment with its standard error at each recorded time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEnvelope {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    pub seeds: usize,
    /// `C2` of the uniform bound, when growth constants are known.
    pub c2: Option<f64>,
    pub gamma: Option<f64>,
}

impl MomentEnvelope {
    pub fn initial(&self) -> f64 {
        self.mean[0]
    }

    /// Largest `mean(t) - (initial + C2 + k * se(t))` over the series.
    pub fn worst_excess(&self, k: f64) -> Option<f64> {
        let c2 = self.c2?;
        let init = self.initial();
        self.mean
            .iter()
            .zip(&self.se)
            .map(|(m, s)| m - (init + c2 + k * s))
            .reduce(f64::max)
    }
}

pub fn moment_envelope(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<MomentEnvelope> {
    let obj = cfg.validate()?;
    if seeds.is_empty() {
        return Err(CboError::config("probe.seeds", "need at least one seed"));
    }
    let record = Recording {
        second_moment: true,
        every: cfg.record.every.max(1),
        ..Recording::default()
    };
    let runs = par::map_collect(seeds.len(), |s| {
        run(&cfg.init, cfg.particles, &cfg.params, &obj, seeds[s], &record, cfg.tolerance)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let series: Vec<&TrajectorySeries> = runs
        .iter()
        .map(|r| r.series(SERIES_SECOND_MOMENT).expect("recorded"))
        .collect();
    let times = series[0].times.clone();
    let n = seeds.len() as f64;
    let mut mean = Vec::with_capacity(times.len());
    let mut se = Vec::with_capacity(times.len());
    for k in 0..times.len() {
        let vals: Vec<f64> = series.iter().map(|s| s.values[k][0]).collect();
        let m = vals.iter().sum::<f64>() / n;
        let var = if seeds.len() > 1 {
            vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        mean.push(m);
        se.push((var / n).sqrt());
    }
    let growth = cfg.check.as_ref().and_then(|c| c.growth).or(obj.growth());
    let (gamma, c2) = match growth {
        Some(g) => {
            let b = compute_b_constants(&GrowthConstants::new(g, cfg.params.alpha));
            let (gamma, c2) = compute_gamma_c2(&cfg.params, b.b1, b.b2, obj.dim());
            (Some(gamma), Some(c2))
        }
        None => (None, None),
    };
    Ok(MomentEnvelope {
        times,
        mean,
        se,
        seeds: seeds.len(),
        c2,
        gamma,
    })
}

pub enum ProbeOutput {
    Contraction(TrajectorySeries),
    InvariantMean(InvariantMeanReport),
    Moments(MomentEnvelope),
}

/// Runs the `[probe]` section of `cfg`. `seeds` overrides the configured count.
pub fn run_probe(cfg: &ExperimentConfig, seeds: Option<usize>) -> Result<ProbeOutput> {
    let probe = cfg
        .probe
        .as_ref()
        .ok_or_else(|| CboError::config("probe", "config has no [probe] section"))?;
    let obj = cfg.validate()?;
    match probe {
        ProbeConfig::Contraction {
            init_b,
            seeds: count,
            checkpoints,
            shared_noise,
        } => {
            init_b.validate(obj.dim())?;
            let pairs = contraction_seeds(cfg.seed, seeds.unwrap_or(*count), *shared_noise);
            let series = contraction_probe(&cfg.params, &obj, &cfg.init, init_b, cfg.particles, &pairs, checkpoints)?;
            Ok(ProbeOutput::Contraction(series))
        }
        ProbeConfig::InvariantMean {
            seeds: count,
            tail_fraction,
        } => {
            if !(*tail_fraction > 0.0 && *tail_fraction <= 1.0) {
                return Err(CboError::config("probe.tail_fraction", "must lie in (0, 1]"));
            }
            let tail = tail_window(cfg.params.n_steps, *tail_fraction);
            let list = seed_list(cfg.seed, seeds.unwrap_or(*count));
            let report = invariant_mean_probe(&cfg.params, &obj, &cfg.init, cfg.particles, &list, tail)?;
            Ok(ProbeOutput::InvariantMean(report))
        }
        ProbeConfig::Moments { seeds: count } => {
            let list = seed_list(cfg.seed, seeds.unwrap_or(*count));
            Ok(ProbeOutput::Moments(moment_envelope(cfg, &list)?))
        }
    }
}

impl ProbeOutput {
    pub fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let put = |w: &mut csv::Writer<Vec<u8>>, fields: Vec<String>| w.write_record(fields).expect("in-memory writer");
        match self {
            ProbeOutput::Contraction(series) => return super::output::series_csv(series),
            ProbeOutput::InvariantMean(r) => {
                put(
                    &mut w,
                    ["axis", "mean", "mean_se", "consensus", "residual", "residual_se", "rescaled_mean"]
                        .map(String::from)
                        .to_vec(),
                );
                for j in 0..r.mean.len() {
                    put(
                        &mut w,
                        vec![
                            j.to_string(),
                            r.mean[j].to_string(),
                            r.mean_se[j].to_string(),
                            r.consensus[j].to_string(),
                            r.residual[j].to_string(),
                            r.residual_se[j].to_string(),
                            r.rescaled_mean[j].to_string(),
                        ],
                    );
                }
            }
            ProbeOutput::Moments(e) => {
                put(&mut w, ["time", "mean", "se", "bound"].map(String::from).to_vec());
                let bound = e.c2.map(|c| e.initial() + c);
                for k in 0..e.times.len() {
                    put(
                        &mut w,
                        vec![
                            e.times[k].to_string(),
                            e.mean[k].to_string(),
                            e.se[k].to_string(),
                            bound.map(|b| b.to_string()).unwrap_or_default(),
                        ],
                    );
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
    }

    pub fn summary(&self) -> String {
        match self {
            ProbeOutput::Contraction(s) => {
                let v = s.scalars();
                match (v.first(), v.last()) {
                    (Some(a), Some(b)) => format!("w2: first {a:.6} last {b:.6} ratio {:.4}", b / a),
                    _ => "w2: no checkpoints".into(),
                }
            }
            ProbeOutput::InvariantMean(r) => format!(
                "invariant mean over {} seeds, steps {}..{}: residual {:?} (se {:?}), mean/kappa {:?}",
                r.seeds, r.tail_steps.0, r.tail_steps.1, r.residual, r.residual_se, r.rescaled_mean
            ),
            ProbeOutput::Moments(e) => {
                let peak = e.mean.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                match (e.c2, e.worst_excess(4.0)) {
                    (Some(c2), Some(x)) => format!(
                        "second moment over {} seeds: initial {:.6} peak {:.6} C2 {:.6} worst excess over bound+4se {:.6}",
                        e.seeds,
                        e.initial(),
                        peak,
                        c2,
                        x
                    ),
                    _ => format!(
                        "second moment over {} seeds: initial {:.6} peak {:.6} (no growth constants, no bound)",
                        e.seeds,
                        e.initial(),
                        peak
                    ),
                }
            }
        }
    }
}
