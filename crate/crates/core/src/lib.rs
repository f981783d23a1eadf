//! Finite-time stabilization of systems with asynchronous, possibly
//! unbounded time delays, and finite-time synchronization of delayed
//! networks.
//!
//! The crate covers simulation (fixed-step delayed integration with a dense
//! history and sliding-mode handling of sign feedback), the static and
//! adaptive controllers, mechanical checks of the sufficient conditions, and
//! trajectory monitors for the two-phase convergence structure: the delayed
//! window supremum of the error norm first falls below 1, then the norm
//! decreases linearly to 0.
//!
//! Modules:
//! - [`delay`]: delay profiles, rate functions `μ(t)`, and the constants `β`, `η`.
//! - [`history`] and [`integrator`]: trajectory storage and stepping.
//! - [`control`]: static and adaptive control laws.
//! - [`conditions`]: feasibility reports, spectral utilities, settling bounds.
//! - [`scalar`] and [`network`]: the delayed scalar system and coupled networks.
//! - [`monitors`]: Lyapunov traces, contact points, phase detection.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditions;
pub mod control;
pub mod delay;
pub mod error;
pub mod history;
pub mod integrator;
pub mod monitors;
pub mod network;
pub mod scalar;

use serde::{Deserialize, Serialize};

pub use conditions::{ConditionReport, TheoremId};
pub use control::{AdaptiveGainState, AdaptiveRates, GainMode, NetworkControlSpec, StaticScalarGains};
pub use delay::{asymptotics, Asymptotics, DelayProfile, RateFunction};
pub use error::{Error, Result};
pub use history::{window_sup, HistoryTrajectory, WindowFunctional};
pub use integrator::{integrate, IntegratorConfig, Method};
pub use monitors::{FunctionalId, LyapunovTrace, PhaseReport};
pub use network::{NetworkModel, SyncExperiment, SyncResult};

/// Vector norm used by a theorem variant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    #[default]
    Two,
    One,
    Inf,
}

impl Norm {
    pub fn norm(&self, x: &[f64]) -> f64 {
        match self {
            Norm::Two => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Norm::One => x.iter().map(|v| v.abs()).sum(),
            Norm::Inf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// Functional whose window supremum drives the switching rules:
    /// `p^T p` for the 2-norm, the plain norm otherwise.
    pub fn switching_functional(&self) -> WindowFunctional {
        match self {
            Norm::Two => WindowFunctional::SqNorm2,
            Norm::One => WindowFunctional::Norm1,
            Norm::Inf => WindowFunctional::NormInf,
        }
    }
}
