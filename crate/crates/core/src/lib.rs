//! Rescaled consensus-based optimization (CBO).
//!
//! A population of particles drifts toward `kappa * m_alpha`, where `m_alpha`
//! is the `exp(-alpha f)`-weighted average of the particle positions, while
//! being shaken by noise whose per-axis amplitude is `sigma * (delta + |x_k - kappa m_k|)`.
//! The crate provides the particle simulator, benchmark objectives, the
//! explicit parameter conditions under which the long-time theory applies,
//! law-level diagnostics and an experiment harness (config files, sweeps, CSV).
//!
//! Per-particle work runs on rayon when the `parallel` feature is enabled
//! (the default). Results are bit-identical with or without it and for any
//! thread count: noise comes from counter-based streams and every reduction
//! uses a fixed block layout.

pub mod consensus;
pub mod diagnostics;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod objectives;
pub mod par;
pub mod paramcheck;
pub mod rng;

pub use consensus::{consensus_point, ConsensusPoint};
pub use dynamics::{em_step, run, success_test, CboParams, Recording, RunSummary, Simulation, StepReport};
pub use ensemble::{init_ensemble, Ensemble, InitSpec};
pub use error::{CboError, Result};
pub use objectives::{GrowthBounds, MinimizerSet, Objective};
pub use rng::RngStream;
