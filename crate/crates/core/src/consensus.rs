//! The weighted consensus point `m_alpha = sum_i x_i w_i / sum_i w_i`,
//! `w_i = exp(-alpha f(x_i))`.
//!
//! Weights are shifted by the smallest objective value before
//! exponentiation, so the largest weight is exactly 1 and the normalizer
//! never underflows, even at `alpha = 1e15`. Sums use compensated block
//! reduction (see [`crate::par::block_reduce`]).

use serde::{Deserialize, Serialize};

use crate::diagnostics::w2_1d;
use crate::ensemble::Ensemble;
use crate::error::{CboError, Result};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusPoint {
    pub point: Vec<f64>,
    /// The minimum objective value subtracted inside the exponent.
    pub log_weight_shift: f64,
    /// `(sum w)^2 / sum w^2` of the shifted weights, in `[1, N]`.
    pub effective_sample_size: f64,
    /// First particle attaining the minimum objective value.
    pub argmin_index: usize,
}

struct Shifted<'a> {
    fvalues: &'a [f64],
    fmin: f64,
    argmin: usize,
    alpha: f64,
}

impl Shifted<'_> {
    #[inline]
    fn weight(&self, i: usize) -> f64 {
        (-(self.alpha * (self.fvalues[i] - self.fmin))).exp()
    }
}

fn shifted_weights<'a>(ens: &'a Ensemble, alpha: f64) -> Result<Shifted<'a>> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(CboError::config("alpha", format!("must be finite and non-negative, got {alpha}")));
    }
    let fvalues = ens.fvalues()?;
    let mut fmin = f64::INFINITY;
    let mut argmin = 0;
    for (i, &f) in fvalues.iter().enumerate() {
        if !f.is_finite() {
            return Err(CboError::NonFiniteObjective { particle: i, value: f });
        }
        if f < fmin {
            fmin = f;
            argmin = i;
        }
    }
    Ok(Shifted {
        fvalues,
        fmin,
        argmin,
        alpha,
    })
}

/// Consensus point of the ensemble at inverse temperature `alpha`.
///
/// Particles tied at the minimum get equal unit weight.
pub fn consensus_point(ens: &Ensemble, alpha: f64) -> Result<ConsensusPoint> {
    let w = shifted_weights(ens, alpha)?;
    let d = ens.dim();
    // layout: [sum w, sum w^2, sum w x_0, ..., sum w x_{d-1}]
    let sums = par::block_reduce(ens.n(), d + 2, |i, out| {
        let wi = w.weight(i);
        out[0] = wi;
        out[1] = wi * wi;
        for (o, &x) in out[2..].iter_mut().zip(ens.position(i)) {
            *o = wi * x;
        }
    });
    let total = sums[0];
    let point = sums[2..].iter().map(|s| s / total).collect();
    Ok(ConsensusPoint {
        point,
        log_weight_shift: w.fmin,
        effective_sample_size: total * total / sums[1],
        argmin_index: w.argmin,
    })
}

/// `sum_i |x_i|^2 w_i / sum_i w_i`, the middle term of the consensus-point
/// moment bound `|m|^2 <= (weighted second moment) <= b1 + b2 * (1/N) sum |x_i|^2`.
pub fn weighted_second_moment(ens: &Ensemble, alpha: f64) -> Result<f64> {
    let w = shifted_weights(ens, alpha)?;
    let sums = par::block_reduce(ens.n(), 2, |i, out| {
        let wi = w.weight(i);
        out[0] = wi;
        out[1] = wi * ens.position(i).iter().map(|x| x * x).sum::<f64>();
    });
    Ok(sums[1] / sums[0])
}

/// `|m_alpha(A) - m_alpha(B)|` together with the exact `W2(A, B)` of two
/// equal-size one-dimensional ensembles. The ratio estimates the stability
/// constant of the consensus map.
pub fn consensus_stability_gap(a: &Ensemble, b: &Ensemble, alpha: f64) -> Result<(f64, f64)> {
    for ens in [a, b] {
        if ens.dim() != 1 {
            return Err(CboError::UnsupportedDimension {
                expected: 1,
                got: ens.dim(),
            });
        }
    }
    if a.n() != b.n() {
        return Err(CboError::Input(format!("ensemble sizes differ: {} vs {}", a.n(), b.n())));
    }
    let ma = consensus_point(a, alpha)?.point[0];
    let mb = consensus_point(b, alpha)?.point[0];
    Ok(((ma - mb).abs(), w2_1d(a.positions(), b.positions())?))
}

/// Empirical stability-constant estimate over random ensemble pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityEstimate {
    /// Largest observed `|m(A) - m(B)| / W2(A, B)`.
    pub max_ratio: f64,
    /// All observed ratios, in trial order.
    pub ratios: Vec<f64>,
    /// Histogram of the ratios over `[0, max_ratio]`.
    pub histogram: Vec<usize>,
}

/// Fits a stability constant for `obj` from `trials` independent pairs of
/// `n`-particle ensembles drawn from `init`.
pub fn estimate_stability_constant(
    obj: &crate::objectives::Objective,
    init: &crate::ensemble::InitSpec,
    n: usize,
    alpha: f64,
    trials: usize,
    seed: u64,
    bins: usize,
) -> Result<StabilityEstimate> {
    use crate::rng::derive_seed;
    let ratios = par::map_collect(trials, |t| -> Result<f64> {
        let mut a = crate::ensemble::init_ensemble(init, n, 1, derive_seed(seed, 2 * t as u64))?;
        let mut b = crate::ensemble::init_ensemble(init, n, 1, derive_seed(seed, 2 * t as u64 + 1))?;
        a.evaluate(obj)?;
        b.evaluate(obj)?;
        let (gap, w2) = consensus_stability_gap(&a, &b, alpha)?;
        Ok(if w2 > 0.0 { gap / w2 } else { 0.0 })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let bins = bins.max(1);
    let mut histogram = vec![0; bins];
    for r in &ratios {
        let k = if max_ratio > 0.0 {
            ((r / max_ratio) * bins as f64) as usize
        } else {
            0
        };
        histogram[k.min(bins - 1)] += 1;
    }
    Ok(StabilityEstimate {
        max_ratio,
        ratios,
        histogram,
    })
}
