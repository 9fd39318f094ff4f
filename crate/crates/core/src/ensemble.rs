//! Particle ensemble state and initial laws.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{CboError, Result};
use crate::objectives::Objective;
use crate::par;
use crate::rng;

/// Initial distribution of the particles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitSpec {
    /// Independent uniform coordinates on `[lo_k, hi_k]`.
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
    /// Independent normal coordinates with the given variances.
    Gaussian { mean: Vec<f64>, var: Vec<f64> },
    /// Every particle at `point`.
    Dirac { point: Vec<f64> },
}

impl InitSpec {
    pub fn uniform(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        InitSpec::UniformBox { lo, hi }
    }

    /// The axis-aligned cube `[lo, hi]^d`.
    pub fn cube(lo: f64, hi: f64, d: usize) -> Self {
        InitSpec::UniformBox {
            lo: vec![lo; d],
            hi: vec![hi; d],
        }
    }

    pub fn dirac(point: Vec<f64>) -> Self {
        InitSpec::Dirac { point }
    }

    pub fn dim(&self) -> usize {
        match self {
            InitSpec::UniformBox { lo, .. } => lo.len(),
            InitSpec::Gaussian { mean, .. } => mean.len(),
            InitSpec::Dirac { point } => point.len(),
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let check_len = |field: &str, v: &[f64]| {
            if v.len() != d {
                return Err(CboError::config(
                    field,
                    format!("expected {d} entries, got {}", v.len()),
                ));
            }
            if let Some(k) = v.iter().position(|x| !x.is_finite()) {
                return Err(CboError::config(format!("{field}[{k}]"), "must be finite"));
            }
            Ok(())
        };
        match self {
            InitSpec::UniformBox { lo, hi } => {
                check_len("init.lo", lo)?;
                check_len("init.hi", hi)?;
                if let Some(k) = (0..d).find(|&k| lo[k] >= hi[k]) {
                    return Err(CboError::config(
                        format!("init.lo[{k}]"),
                        format!("lower bound {} must be below upper bound {}", lo[k], hi[k]),
                    ));
                }
            }
            InitSpec::Gaussian { mean, var } => {
                check_len("init.mean", mean)?;
                check_len("init.var", var)?;
                if let Some(k) = var.iter().position(|&v| v < 0.0) {
                    return Err(CboError::config(
                        format!("init.var[{k}]"),
                        format!("variance {} is negative", var[k]),
                    ));
                }
            }
            InitSpec::Dirac { point } => check_len("init.point", point)?,
        }
        Ok(())
    }
}

/// `n` particles in `d` dimensions, stored row-major, with a cache of their
/// objective values.
#[derive(Debug, Clone)]
pub struct Ensemble {
    positions: Vec<f64>,
    fvalues: Vec<f64>,
    n: usize,
    d: usize,
    fresh: bool,
}

/// Equal positions, and equal cached values when both caches are fresh.
impl PartialEq for Ensemble {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.d == other.d
            && self.positions == other.positions
            && self.fresh == other.fresh
            && (!self.fresh || self.fvalues == other.fvalues)
    }
}

impl Ensemble {
    /// Wraps row-major positions. The objective cache starts stale.
    pub fn from_positions(n: usize, d: usize, positions: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(CboError::config("ensemble", "need at least one particle and one dimension"));
        }
        if positions.len() != n * d {
            return Err(CboError::Input(format!(
                "{} coordinates given for {n} particles in {d} dimensions",
                positions.len()
            )));
        }
        if let Some(k) = positions.iter().position(|x| !x.is_finite()) {
            return Err(CboError::Input(format!("coordinate {} of particle {} is not finite", k % d, k / d)));
        }
        Ok(Ensemble {
            positions,
            fvalues: vec![f64::NAN; n],
            n,
            d,
            fresh: false,
        })
    }

    /// One-dimensional ensemble from a list of points.
    pub fn from_points_1d(points: &[f64]) -> Result<Self> {
        Self::from_positions(points.len(), 1, points.to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.d..(i + 1) * self.d]
    }

    /// Mutable access to the coordinates; marks the objective cache stale.
    pub fn positions_mut(&mut self) -> &mut [f64] {
        self.fresh = false;
        &mut self.positions
    }

    pub fn is_fresh(&self) -> bool {
        self.fresh
    }

    /// Cached objective values, or [`CboError::StaleCache`].
    pub fn fvalues(&self) -> Result<&[f64]> {
        if self.fresh {
            Ok(&self.fvalues)
        } else {
            Err(CboError::StaleCache)
        }
    }

    /// Recomputes the objective cache.
    pub fn evaluate(&mut self, obj: &Objective) -> Result<()> {
        if obj.dim() != self.d {
            return Err(CboError::UnsupportedDimension {
                expected: obj.dim(),
                got: self.d,
            });
        }
        par::map_rows(&self.positions, self.d, &mut self.fvalues, |x| obj.eval(x));
        self.fresh = true;
        Ok(())
    }

    /// Overwrites the cache with externally computed values (tests, replays).
    pub fn set_fvalues(&mut self, values: Vec<f64>) -> Result<()> {
        if values.len() != self.n {
            return Err(CboError::Input(format!("{} objective values for {} particles", values.len(), self.n)));
        }
        self.fvalues = values;
        self.fresh = true;
        Ok(())
    }

    /// Empirical mean of the positions.
    pub fn mean(&self) -> Vec<f64> {
        let d = self.d;
        let sums = par::block_reduce(self.n, d, |i, out| out.copy_from_slice(self.position(i)));
        sums.into_iter().map(|s| s / self.n as f64).collect()
    }

    /// `(1/N) sum_i |x_i|^2`.
    pub fn second_moment(&self) -> f64 {
        let s = par::block_reduce(self.n, 1, |i, out| {
            out[0] = self.position(i).iter().map(|x| x * x).sum();
        });
        s[0] / self.n as f64
    }

    /// `(1/N) sum_i |x_i - mean|^2`.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let s = par::block_reduce(self.n, 1, |i, out| {
            out[0] = self.position(i).iter().zip(&m).map(|(x, c)| (x - c).powi(2)).sum();
        });
        s[0] / self.n as f64
    }

    /// Index and coordinate of the first non-finite coordinate, if any.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.positions
            .iter()
            .position(|x| !x.is_finite())
            .map(|k| (k / self.d, k % self.d))
    }
}

/// Draws `n` i.i.d. particles from `spec` using the initialization stream of `seed`.
pub fn init_ensemble(spec: &InitSpec, n: usize, d: usize, seed: u64) -> Result<Ensemble> {
    if n == 0 {
        return Err(CboError::config("particles", "need at least one particle"));
    }
    if d == 0 {
        return Err(CboError::config("dim", "need at least one dimension"));
    }
    spec.validate(d)?;
    let mut rng = rng::init_rng(seed);
    let mut positions = Vec::with_capacity(n * d);
    match spec {
        InitSpec::UniformBox { lo, hi } => {
            for _ in 0..n {
                for k in 0..d {
                    positions.push(rng.random_range(lo[k]..hi[k]));
                }
            }
        }
        InitSpec::Gaussian { mean, var } => {
            for _ in 0..n {
                for k in 0..d {
                    let z: f64 = rng.sample(StandardNormal);
                    positions.push(mean[k] + var[k].sqrt() * z);
                }
            }
        }
        InitSpec::Dirac { point } => {
            for _ in 0..n {
                positions.extend_from_slice(point);
            }
        }
    }
    Ensemble::from_positions(n, d, positions)
}
