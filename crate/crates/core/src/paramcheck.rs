//! Sufficient parameter conditions for the long-time theory of rescaled CBO.
//!
//! All validators are pure and total: any finite input produces a verdict.
//! They label configurations; nothing in the crate refuses to run a
//! configuration that fails them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::CboParams;
use crate::objectives::GrowthBounds;

/// Growth constants of the objective plus the inverse temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    pub c_ell: f64,
    pub c_u: f64,
    pub m: f64,
    pub alpha: f64,
}

impl GrowthConstants {
    pub fn new(bounds: GrowthBounds, alpha: f64) -> Self {
        GrowthConstants {
            c_ell: bounds.c_ell,
            c_u: bounds.c_u,
            m: bounds.m,
            alpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BConstants {
    /// `M^2 + b2`
    pub b1: f64,
    /// `2 (c_u / c_ell) (1 + 1 / (alpha M^2 c_ell))`
    pub b2: f64,
    /// `b2` evaluated at `alpha = 1`; an upper bound valid for every `alpha >= 1`.
    pub b2_alpha_free: f64,
}

fn b2_at(g: &GrowthConstants, alpha: f64) -> f64 {
    2.0 * (g.c_u / g.c_ell) * (1.0 + 1.0 / (alpha * g.m * g.m * g.c_ell))
}

/// Constants of the consensus-point bound `|m|^2 <= b1 + b2 E|X|^2`.
pub fn compute_b_constants(g: &GrowthConstants) -> BConstants {
    let b2 = b2_at(g, g.alpha);
    BConstants {
        b1: g.m * g.m + b2,
        b2,
        b2_alpha_free: b2_at(g, 1.0),
    }
}

/// `gamma` and `C2` of the uniform second-moment bound
/// `sup_t E|X_t|^2 <= E|X_0|^2 + C2` (valid when `gamma > 0`).
pub fn compute_gamma_c2(p: &CboParams, b1: f64, b2: f64, d: usize) -> (f64, f64) {
    let coupling = p.lambda * p.kappa / 2.0 + p.sigma * p.sigma * (1.0 + p.delta) * p.kappa * p.kappa;
    let gamma = p.lambda * (1.0 - p.kappa / 2.0) - p.sigma * p.sigma * (1.0 + p.delta) - b2 * coupling;
    let c2 = coupling * b1 + p.sigma * p.sigma / 2.0 * p.delta * (p.delta + 1.0) * d as f64;
    (gamma, c2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentVerdict {
    pub status: Status,
    pub gamma: f64,
    pub c2: f64,
    pub b: BConstants,
    /// `delta = 1, kappa < 1/(2(1+b2)), lambda > 16 sigma^2`
    pub simple_config: bool,
}

fn kappa_existence_bound(b2: f64) -> f64 {
    1.0 / (2.0 * (1.0 + b2))
}

/// PASS iff `gamma > 0`.
pub fn validate_moment_bound(p: &CboParams, g: &GrowthConstants, d: usize) -> MomentVerdict {
    let b = compute_b_constants(g);
    let (gamma, c2) = compute_gamma_c2(p, b.b1, b.b2, d);
    let simple_config =
        p.delta == 1.0 && p.kappa < kappa_existence_bound(b.b2) && p.lambda > 16.0 * p.sigma * p.sigma;
    MomentVerdict {
        status: Status::from_bool(gamma > 0.0),
        gamma,
        c2,
        b,
        simple_config,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExistenceVerdict {
    pub status: Status,
    /// `2 lambda - 4`
    pub lhs: f64,
    /// `lambda kappa (1 + b2) + 4 kappa^2 b2`
    pub rhs: f64,
    /// `kappa < 1/(2(1+b2))` and `lambda > 4`
    pub simple_pair: bool,
}

/// PASS iff `2 lambda - 4 > lambda kappa (1 + b2) + 4 kappa^2 b2`.
pub fn validate_existence(p: &CboParams, b2: f64) -> ExistenceVerdict {
    let lhs = 2.0 * p.lambda - 4.0;
    let rhs = p.lambda * p.kappa * (1.0 + b2) + 4.0 * p.kappa * p.kappa * b2;
    ExistenceVerdict {
        status: Status::from_bool(lhs > rhs),
        lhs,
        rhs,
        simple_pair: p.kappa < kappa_existence_bound(b2) && p.lambda > 4.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionVerdict {
    pub status: Status,
    /// `2 lambda - lambda kappa - 2 sigma^2`
    pub theta: f64,
    /// `kappa (lambda + 2 sigma^2 kappa) L_m^2`
    pub a: f64,
    /// `theta - a`, the contraction rate when positive.
    pub rate: f64,
    /// `(2 lambda - 2 sigma^2) / (lambda (2 L_m^2 + 1))`, a sufficient bound on kappa.
    pub kappa_bound: f64,
}

/// PASS iff `theta > 0` and `theta > a`.
///
/// `l_m` is the stability constant of the consensus map on the set of laws
/// with bounded second moment; it depends on that bound and is not
/// computed here. Supply an assumed or estimated value
/// (see [`crate::consensus::estimate_stability_constant`]).
pub fn validate_contraction(p: &CboParams, l_m: f64) -> ContractionVerdict {
    let s2 = p.sigma * p.sigma;
    let theta = 2.0 * p.lambda - p.lambda * p.kappa - 2.0 * s2;
    let a = p.kappa * (p.lambda + 2.0 * s2 * p.kappa) * l_m * l_m;
    ContractionVerdict {
        status: Status::from_bool(theta > 0.0 && theta > a),
        theta,
        a,
        rate: theta - a,
        kappa_bound: (2.0 * p.lambda - 2.0 * s2) / (p.lambda * (2.0 * l_m * l_m + 1.0)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub status: Status,
    pub details: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamReport {
    pub overall: Status,
    pub entries: Vec<CheckEntry>,
}

impl ParamReport {
    pub fn entry(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

pub const CHECK_MOMENT: &str = "moment-bound";
pub const CHECK_EXISTENCE: &str = "existence";
pub const CHECK_CONTRACTION: &str = "contraction";

/// Runs the three validators. Overall PASS requires every check that ran to
/// pass; the contraction check is SKIPPED without `l_m`.
pub fn validate_all(p: &CboParams, g: &GrowthConstants, d: usize, l_m: Option<f64>) -> ParamReport {
    let moment = validate_moment_bound(p, g, d);
    let existence = validate_existence(p, moment.b.b2);
    let flag = |ok: bool, what: &str| format!("{what}: {}", if ok { "holds" } else { "does not hold" });
    let mut entries = vec![
        CheckEntry {
            name: CHECK_MOMENT.into(),
            status: moment.status,
            details: vec![
                ("gamma".into(), moment.gamma),
                ("C2".into(), moment.c2),
                ("b1".into(), moment.b.b1),
                ("b2".into(), moment.b.b2),
                ("b2(alpha>=1)".into(), moment.b.b2_alpha_free),
            ],
            notes: vec![flag(moment.simple_config, "delta=1, kappa<1/(2(1+b2)), lambda>16 sigma^2")],
        },
        CheckEntry {
            name: CHECK_EXISTENCE.into(),
            status: existence.status,
            details: vec![("2*lambda-4".into(), existence.lhs), ("rhs".into(), existence.rhs)],
            notes: vec![flag(existence.simple_pair, "kappa<1/(2(1+b2)), lambda>4")],
        },
    ];
    match l_m {
        Some(l) => {
            let c = validate_contraction(p, l);
            entries.push(CheckEntry {
                name: CHECK_CONTRACTION.into(),
                status: c.status,
                details: vec![
                    ("theta".into(), c.theta),
                    ("a".into(), c.a),
                    ("rate".into(), c.rate),
                    ("kappa_bound".into(), c.kappa_bound),
                    ("L_m".into(), l),
                ],
                notes: vec!["L_m is user-supplied; its validity depends on the second-moment radius".into()],
            });
        }
        None => entries.push(CheckEntry {
            name: CHECK_CONTRACTION.into(),
            status: Status::Skipped,
            details: Vec::new(),
            notes: vec!["no L_m supplied".into()],
        }),
    }
    let overall = if entries.iter().any(|e| e.status == Status::Fail) {
        Status::Fail
    } else {
        Status::Pass
    };
    ParamReport { overall, entries }
}

impl fmt::Display for ParamReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{:<14} {:<8}", e.name, e.status.to_string())?;
            for (k, v) in &e.details {
                writeln!(f, "    {k:<14} {v:>14.6e}")?;
            }
            for n in &e.notes {
                writeln!(f, "    {n}")?;
            }
        }
        write!(f, "{:<14} {}", "overall", self.overall)
    }
}
