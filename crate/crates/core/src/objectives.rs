//! Benchmark objectives and the metadata the parameter checks need.
//!
//! Rastrigin and Ackley take an explicit shift. The one-dimensional Rastrigin
//! variant is minimized at `x = 1`; the two-dimensional formula
//! `20 + sum (x_k^2 - 10 cos(2 pi x_k))` is minimized at the origin, so the
//! two-dimensional experiments that target `(1, 1)` pass `shift = [1, 1]`.

use std::f64::consts::{E, TAU};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CboError, Result};

/// Quadratic growth constants: `c_ell |x|^2 <= f(x) - min f` for `|x| >= m`,
/// and `f(x) - min f <= c_u (|x|^2 + 1)` everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthBounds {
    pub c_ell: f64,
    pub c_u: f64,
    pub m: f64,
}

/// Known global minimizers: finitely many points or a union of boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MinimizerSet {
    Points(Vec<Vec<f64>>),
    /// Each box is a list of per-axis `[lo, hi]` intervals.
    Boxes(Vec<Vec<[f64; 2]>>),
}

impl MinimizerSet {
    pub fn point(p: Vec<f64>) -> Self {
        MinimizerSet::Points(vec![p])
    }

    pub fn is_empty(&self) -> bool {
        match self {
            MinimizerSet::Points(p) => p.is_empty(),
            MinimizerSet::Boxes(b) => b.is_empty(),
        }
    }
}

type CustomFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Rastrigin { shift: Vec<f64> },
    Ackley { shift: Vec<f64> },
    Biminimizer,
    Quadratic { center: Vec<f64> },
    Custom(CustomFn),
}

/// A scalar field on `R^dim` together with optional metadata.
#[derive(Clone)]
pub struct Objective {
    name: String,
    kind: Kind,
    dim: usize,
    minimizers: Option<MinimizerSet>,
    min_value: Option<f64>,
    growth: Option<GrowthBounds>,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("minimizers", &self.minimizers)
            .field("min_value", &self.min_value)
            .field("growth", &self.growth)
            .finish()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Growth constants for `g(x)` with `|x - c|^2 <= g(x) <= |x - c|^2 + extra`.
///
/// For `|x| >= (2 + sqrt 2)|c|` one has `|x - c| >= |x| / sqrt 2`; and
/// `|x - c|^2 <= 2|x|^2 + 2|c|^2`.
fn shifted_square_growth(c: &[f64], extra: f64) -> GrowthBounds {
    let r = norm(c);
    if r == 0.0 {
        GrowthBounds {
            c_ell: 1.0,
            c_u: extra.max(1.0),
            m: 1.0,
        }
    } else {
        GrowthBounds {
            c_ell: 0.5,
            c_u: (2.0f64).max(2.0 * r * r + extra),
            m: (2.0 + std::f64::consts::SQRT_2) * r,
        }
    }
}

impl Objective {
    /// `10 + (x - 1)^2 - 10 cos(2 pi (x - 1))`, minimized at `x = 1`.
    pub fn rastrigin_1d() -> Self {
        let mut obj = Self::rastrigin_shifted(vec![1.0]);
        obj.name = "rastrigin1d".into();
        obj
    }

    /// `sum_k 10 + x_k^2 - 10 cos(2 pi x_k)`, minimized at the origin.
    pub fn rastrigin(d: usize) -> Self {
        Self::rastrigin_shifted(vec![0.0; d])
    }

    /// Rastrigin with its minimizer moved to `shift`.
    pub fn rastrigin_shifted(shift: Vec<f64>) -> Self {
        let d = shift.len();
        assert!(d > 0);
        Objective {
            name: "rastrigin".into(),
            dim: d,
            minimizers: Some(MinimizerSet::point(shift.clone())),
            min_value: Some(0.0),
            growth: Some(shifted_square_growth(&shift, 20.0 * d as f64)),
            kind: Kind::Rastrigin { shift },
        }
    }

    /// Ackley function centred at `shift`:
    /// `-20 exp(-0.2 |x - s|) - exp(mean_k cos(2 pi (x_k - s_k))) + e + 20`.
    ///
    /// Bounded above, so it carries no growth constants.
    pub fn ackley_shifted(shift: Vec<f64>) -> Self {
        assert!(!shift.is_empty());
        Objective {
            name: "ackley".into(),
            dim: shift.len(),
            minimizers: Some(MinimizerSet::point(shift.clone())),
            min_value: Some(0.0),
            growth: None,
            kind: Kind::Ackley { shift },
        }
    }

    /// `((x-1)^2 + (y-1)^2)((x+1)^2 + (y+1)^2)`, zero at `(1,1)` and `(-1,-1)`.
    pub fn biminimizer_2d() -> Self {
        Objective {
            name: "biminimizer".into(),
            dim: 2,
            minimizers: Some(MinimizerSet::Points(vec![vec![1.0, 1.0], vec![-1.0, -1.0]])),
            min_value: Some(0.0),
            growth: None,
            kind: Kind::Biminimizer,
        }
    }

    /// `|x - center|^2`.
    pub fn quadratic(center: Vec<f64>) -> Self {
        assert!(!center.is_empty());
        Objective {
            name: "quadratic".into(),
            dim: center.len(),
            minimizers: Some(MinimizerSet::point(center.clone())),
            min_value: Some(0.0),
            growth: Some(shifted_square_growth(&center, 0.0)),
            kind: Kind::Quadratic { center },
        }
    }

    /// A user-supplied field without metadata.
    pub fn custom(name: impl Into<String>, dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        assert!(dim > 0);
        Objective {
            name: name.into(),
            kind: Kind::Custom(Arc::new(f)),
            dim,
            minimizers: None,
            min_value: None,
            growth: None,
        }
    }

    pub fn with_minimizers(mut self, set: MinimizerSet, min_value: f64) -> Self {
        self.minimizers = Some(set);
        self.min_value = Some(min_value);
        self
    }

    pub fn with_growth(mut self, growth: Option<GrowthBounds>) -> Self {
        self.growth = growth;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn minimizers(&self) -> Option<&MinimizerSet> {
        self.minimizers.as_ref()
    }

    pub fn min_value(&self) -> Option<f64> {
        self.min_value
    }

    pub fn growth(&self) -> Option<GrowthBounds> {
        self.growth
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            Kind::Rastrigin { shift } => x
                .iter()
                .zip(shift)
                .map(|(xi, si)| {
                    let y = xi - si;
                    10.0 + y * y - 10.0 * (TAU * y).cos()
                })
                .sum(),
            Kind::Ackley { shift } => {
                let mut sq = 0.0;
                let mut cos = 0.0;
                for (xi, si) in x.iter().zip(shift) {
                    let y = xi - si;
                    sq += y * y;
                    cos += (TAU * y).cos();
                }
                let d = self.dim as f64;
                // grouped so that f(shift) is exactly 0
                20.0 * (1.0 - (-0.2 * sq.sqrt()).exp()) + (E - (cos / d).exp())
            }
            Kind::Biminimizer => {
                let (a, b) = (x[0], x[1]);
                ((a - 1.0).powi(2) + (b - 1.0).powi(2)) * ((a + 1.0).powi(2) + (b + 1.0).powi(2))
            }
            Kind::Quadratic { center } => x.iter().zip(center).map(|(xi, ci)| (xi - ci).powi(2)).sum(),
            Kind::Custom(f) => f(x),
        }
    }
}

/// Tensor grid on `[-radius, radius]^d` used by [`check_growth`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthGrid {
    pub radius: f64,
    pub points_per_axis: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthSide {
    /// `c_ell |x|^2 <= f(x) - min f` failed at `|x| >= M`.
    Lower,
    /// `f(x) - min f <= c_u (|x|^2 + 1)` failed.
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthViolation {
    pub x: Vec<f64>,
    pub side: GrowthSide,
    /// `f(x) - min f`
    pub gap: f64,
    /// The bound it was compared against.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub grid: GrowthGrid,
    pub bounds: GrowthBounds,
    pub points_checked: usize,
    pub violations: Vec<GrowthViolation>,
}

impl GrowthReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Scans `grid` for violations of the objective's own growth constants.
pub fn check_growth(obj: &Objective, grid: GrowthGrid) -> Result<GrowthReport> {
    let bounds = obj
        .growth()
        .ok_or_else(|| CboError::config("growth", format!("objective '{}' has no growth constants", obj.name())))?;
    check_growth_with(obj, bounds, grid)
}

/// Scans `grid` for violations of `bounds`. The check is sampled, not proven.
pub fn check_growth_with(obj: &Objective, bounds: GrowthBounds, grid: GrowthGrid) -> Result<GrowthReport> {
    let min_f = obj
        .min_value()
        .ok_or_else(|| CboError::config("min_value", format!("objective '{}' has no known minimum", obj.name())))?;
    if grid.points_per_axis < 2 || grid.radius.is_nan() || grid.radius <= 0.0 {
        return Err(CboError::config("grid", "need radius > 0 and at least two points per axis"));
    }
    let d = obj.dim();
    let p = grid.points_per_axis;
    let total = p
        .checked_pow(d as u32)
        .ok_or_else(|| CboError::config("grid", "grid too large"))?;
    let step = 2.0 * grid.radius / (p - 1) as f64;
    let mut x = vec![0.0; d];
    let mut violations = Vec::new();
    for flat in 0..total {
        let mut rem = flat;
        for xk in x.iter_mut() {
            *xk = -grid.radius + (rem % p) as f64 * step;
            rem /= p;
        }
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let gap = obj.eval(&x) - min_f;
        let upper = bounds.c_u * (r2 + 1.0);
        if gap > upper {
            violations.push(GrowthViolation {
                x: x.clone(),
                side: GrowthSide::Upper,
                gap,
                bound: upper,
            });
        }
        if r2.sqrt() >= bounds.m {
            let lower = bounds.c_ell * r2;
            if gap < lower {
                violations.push(GrowthViolation {
                    x: x.clone(),
                    side: GrowthSide::Lower,
                    gap,
                    bound: lower,
                });
            }
        }
    }
    Ok(GrowthReport {
        grid,
        bounds,
        points_checked: total,
        violations,
    })
}
