//! Control laws: static sign-plus-linear feedback, the adaptive switching
//! rules driven by the delayed window supremum, and the network controllers.

use serde::{Deserialize, Serialize};

use crate::delay::{DelayProfile, RateFunction};
use crate::error::{invalid, Result};
use crate::history::{window_sup, HistoryTrajectory, WindowFunctional, WindowSupTracker};
use crate::integrator::GainHook;
use crate::Norm;

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Gains of `p' = c1 p + c2 p(t - Π(t)) - diag(sgn p)(c3 1 + c4 |p|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticScalarGains {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl StaticScalarGains {
    pub fn new(c1: f64, c2: f64, c3: f64, c4: f64) -> Result<Self> {
        let g = Self { c1, c2, c3, c4 };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c3 >= 0.0) {
            return Err(invalid("c3", format!("sign gain must be >= 0, got {}", self.c3)));
        }
        if !(self.c4 >= 0.0) {
            return Err(invalid("c4", format!("linear gain must be >= 0, got {}", self.c4)));
        }
        if !self.c1.is_finite() || !self.c2.is_finite() {
            return Err(invalid("c1", "drift gains must be finite"));
        }
        Ok(())
    }
}

/// `u_i = -sgn(p_i)(c3 + c4 |p_i|)`, zero where `p_i = 0`.
pub fn static_scalar_control(p: &[f64], gains: &StaticScalarGains) -> Vec<f64> {
    p.iter().map(|&v| -sgn(v) * (gains.c3 + gains.c4 * v.abs())).collect()
}

/// Branch of a switching rule, chosen from the window supremum `S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainMode {
    /// `S > 1`
    AboveOne,
    /// `0 < S <= 1`
    InUnitBall,
    /// `S = 0` up to the zero tolerance.
    AtOrigin,
}

impl GainMode {
    /// `zero_tol` is a norm threshold; it is squared for quadratic functionals.
    pub fn classify(window_sup: f64, squared: bool, zero_tol: f64) -> Self {
        let origin = if squared { zero_tol * zero_tol } else { zero_tol };
        if window_sup > 1.0 {
            GainMode::AboveOne
        } else if window_sup <= origin {
            GainMode::AtOrigin
        } else {
            GainMode::InUnitBall
        }
    }
}

/// Positive rates `d1, d2, d3` of an adaptive rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveRates {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl AdaptiveRates {
    pub fn new(d1: f64, d2: f64, d3: f64) -> Result<Self> {
        let r = Self { d1, d2, d3 };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("d1", self.d1), ("d2", self.d2), ("d3", self.d3)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("adaptive rate must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Time-varying gains of an adaptive controller. `sign_gain` is `c3` (or
/// `θ3`); `linear_gain` is `c4` (or `θ4`, or the coupling strength `θ1`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveGainState {
    pub sign_gain: f64,
    pub linear_gain: f64,
    pub rates: AdaptiveRates,
    pub mode: GainMode,
}

impl AdaptiveGainState {
    /// Gains start at zero.
    pub fn new(rates: AdaptiveRates) -> Self {
        Self { sign_gain: 0.0, linear_gain: 0.0, rates, mode: GainMode::AboveOne }
    }
}

/// Derivatives `(ċ3, ċ4)` of the scalar rules for state `p` at a time where
/// the rate function equals `mu` and the rule is in `mode`.
pub fn scalar_gain_rates(mode: GainMode, rates: &AdaptiveRates, mu: f64, p: &[f64], norm: Norm) -> (f64, f64) {
    match mode {
        GainMode::AboveOne => {
            let driver = match norm {
                Norm::Two => p.iter().map(|v| v * v).sum(),
                _ => norm.norm(p),
            };
            (0.0, rates.d2 * mu * driver)
        }
        GainMode::InUnitBall => (rates.d1, rates.d3 * norm.norm(p)),
        GainMode::AtOrigin => (0.0, 0.0),
    }
}

/// One explicit Euler step of the scalar adaptive rule at grid time `t` of
/// `traj`. Returns the derivatives used.
#[allow(clippy::too_many_arguments)]
pub fn adaptive_scalar_update(
    state: &mut AdaptiveGainState,
    traj: &HistoryTrajectory,
    t: f64,
    rate: &RateFunction,
    profile: &DelayProfile,
    norm: Norm,
    h: f64,
    zero_tol: f64,
) -> Result<(f64, f64)> {
    let functional = norm.switching_functional();
    let sup = window_sup(traj, t, profile, &functional)?;
    state.mode = GainMode::classify(sup, functional.is_squared(), zero_tol);
    let mut p = vec![0.0; traj.dim()];
    traj.query(t, &mut p)?;
    let (d3, d4) = scalar_gain_rates(state.mode, &state.rates, rate.value(t), &p, norm);
    state.sign_gain += h * d3;
    state.linear_gain += h * d4;
    Ok((d3, d4))
}

/// Gain hook for the scalar adaptive rules; gains are recorded as `c3, c4`.
#[derive(Clone, Debug)]
pub struct ScalarAdaptiveHook {
    pub rates: AdaptiveRates,
    pub norm: Norm,
    pub rate: RateFunction,
    pub profile: DelayProfile,
    pub zero_tol: f64,
    tracker: WindowSupTracker,
    modes: Vec<GainMode>,
}

impl ScalarAdaptiveHook {
    pub fn new(rates: AdaptiveRates, norm: Norm, rate: RateFunction, profile: DelayProfile, zero_tol: f64) -> Self {
        Self {
            rates,
            norm,
            rate,
            profile,
            zero_tol,
            tracker: WindowSupTracker::new(norm.switching_functional()).allow_prehistory(),
            modes: Vec::new(),
        }
    }

    /// Rule branch used at each step.
    pub fn modes(&self) -> &[GainMode] {
        &self.modes
    }
}

impl GainHook for ScalarAdaptiveHook {
    fn names(&self) -> Vec<String> {
        vec!["c3".into(), "c4".into()]
    }

    fn initial(&self) -> Vec<f64> {
        vec![0.0, 0.0]
    }

    fn rates(&mut self, history: &HistoryTrajectory, _gains: &[f64], out: &mut [f64]) -> Result<()> {
        let sup = self.tracker.update(history, &self.profile)?;
        let mode = GainMode::classify(sup, self.norm == Norm::Two, self.zero_tol);
        self.modes.push(mode);
        let t = history.current_time();
        let (a, b) = scalar_gain_rates(mode, &self.rates, self.rate.value(t), history.last_state(), self.norm);
        out[0] = a;
        out[1] = b;
        Ok(())
    }
}

/// Network controller family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NetworkControlKind {
    /// Linear feedback `-θ1 σ e_1` on node 1 only, sign feedback everywhere.
    Pinning { sigma: f64 },
    /// `-θ3 sgn(e_i) - θ4 e_i` on every node.
    FullNode,
}

/// Which gains the adaptive network rule adapts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkAdaptiveVariant {
    /// Coupling strength `θ1` and sign gain `θ3` (pinning controller).
    AdaptTheta1Theta3,
    /// Sign gain `θ3` and linear gain `θ4` (full-node controller).
    AdaptTheta3Theta4,
}

impl NetworkAdaptiveVariant {
    pub fn gain_names(&self) -> [&'static str; 2] {
        match self {
            NetworkAdaptiveVariant::AdaptTheta1Theta3 => ["theta1", "theta3"],
            NetworkAdaptiveVariant::AdaptTheta3Theta4 => ["theta3", "theta4"],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkAdaptiveSpec {
    pub variant: NetworkAdaptiveVariant,
    pub rates: AdaptiveRates,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkControlSpec {
    pub kind: NetworkControlKind,
    pub theta3: f64,
    pub theta4: f64,
    pub adaptive: Option<NetworkAdaptiveSpec>,
}

impl NetworkControlSpec {
    pub fn pinning(sigma: f64, theta3: f64) -> Self {
        Self { kind: NetworkControlKind::Pinning { sigma }, theta3, theta4: 0.0, adaptive: None }
    }

    pub fn full_node(theta3: f64, theta4: f64) -> Self {
        Self { kind: NetworkControlKind::FullNode, theta3, theta4, adaptive: None }
    }

    /// Adaptive full-node control with `θ3(0) = θ4(0) = 0`.
    pub fn adaptive_full_node(rates: AdaptiveRates) -> Self {
        Self {
            kind: NetworkControlKind::FullNode,
            theta3: 0.0,
            theta4: 0.0,
            adaptive: Some(NetworkAdaptiveSpec { variant: NetworkAdaptiveVariant::AdaptTheta3Theta4, rates }),
        }
    }

    /// Adaptive pinning control with `θ1(0) = θ3(0) = 0`.
    pub fn adaptive_pinning(sigma: f64, rates: AdaptiveRates) -> Self {
        Self {
            kind: NetworkControlKind::Pinning { sigma },
            theta3: 0.0,
            theta4: 0.0,
            adaptive: Some(NetworkAdaptiveSpec { variant: NetworkAdaptiveVariant::AdaptTheta1Theta3, rates }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let NetworkControlKind::Pinning { sigma } = self.kind {
            if !(sigma > 0.0) {
                return Err(invalid("sigma", format!("pinning strength must be positive, got {sigma}")));
            }
        }
        if !(self.theta3 >= 0.0) {
            return Err(invalid("theta3", format!("must be >= 0, got {}", self.theta3)));
        }
        if !(self.theta4 >= 0.0) {
            return Err(invalid("theta4", format!("must be >= 0, got {}", self.theta4)));
        }
        if let Some(a) = &self.adaptive {
            a.rates.validate()?;
            let ok = matches!(
                (a.variant, self.kind),
                (NetworkAdaptiveVariant::AdaptTheta1Theta3, NetworkControlKind::Pinning { .. })
                    | (NetworkAdaptiveVariant::AdaptTheta3Theta4, NetworkControlKind::FullNode)
            );
            if !ok {
                return Err(invalid(
                    "adaptive",
                    "theta1/theta3 adaptation needs pinning control, theta3/theta4 needs full-node control",
                ));
            }
        }
        Ok(())
    }
}

/// Pinning controller on the flattened errors `e` (`N` blocks of size `n`).
pub fn pinning_control(e: &[f64], n: usize, sigma: f64, theta1: f64, theta3: f64) -> Vec<f64> {
    e.iter()
        .enumerate()
        .map(|(k, &v)| {
            let pin = if k < n { -theta1 * sigma * v } else { 0.0 };
            pin - theta3 * sgn(v)
        })
        .collect()
}

/// Full-node controller `u_i = -θ3 sgn(e_i) - θ4 e_i`.
pub fn full_node_control(e: &[f64], theta3: f64, theta4: f64) -> Vec<f64> {
    e.iter().map(|&v| -theta3 * sgn(v) - theta4 * v).collect()
}

/// Applies `spec` with coupling strength `theta1`.
pub fn network_control(e: &[f64], n: usize, spec: &NetworkControlSpec, theta1: f64) -> Vec<f64> {
    match spec.kind {
        NetworkControlKind::Pinning { sigma } => pinning_control(e, n, sigma, theta1, spec.theta3),
        NetworkControlKind::FullNode => full_node_control(e, spec.theta3, spec.theta4),
    }
}

/// Derivatives of the adapted pair (in the variant's gain order) given the
/// switching sum `S = Σ e_i^T e_i` at time `t` and its window supremum.
pub fn network_gain_rates(
    mode: GainMode,
    variant: NetworkAdaptiveVariant,
    rates: &AdaptiveRates,
    mu: f64,
    sq_sum: f64,
) -> [f64; 2] {
    let (linear, sign) = match mode {
        GainMode::AboveOne => (rates.d1 * mu * sq_sum, 0.0),
        GainMode::InUnitBall => (rates.d2 * sq_sum.sqrt(), rates.d3),
        GainMode::AtOrigin => (0.0, 0.0),
    };
    match variant {
        NetworkAdaptiveVariant::AdaptTheta1Theta3 => [linear, sign],
        NetworkAdaptiveVariant::AdaptTheta3Theta4 => [sign, linear],
    }
}

/// One explicit Euler step of an adaptive network rule at grid time `t` of
/// the error trajectory. Returns the derivatives in the variant's order.
#[allow(clippy::too_many_arguments)]
pub fn adaptive_network_update(
    state: &mut AdaptiveGainState,
    error_traj: &HistoryTrajectory,
    t: f64,
    rate: &RateFunction,
    profile: &DelayProfile,
    variant: NetworkAdaptiveVariant,
    h: f64,
    zero_tol: f64,
) -> Result<[f64; 2]> {
    let sup = window_sup(error_traj, t, profile, &WindowFunctional::SqNorm2)?;
    state.mode = GainMode::classify(sup, true, zero_tol);
    let mut e = vec![0.0; error_traj.dim()];
    error_traj.query(t, &mut e)?;
    let s: f64 = e.iter().map(|v| v * v).sum();
    let d = network_gain_rates(state.mode, variant, &state.rates, rate.value(t), s);
    let (d_sign, d_linear) = match variant {
        NetworkAdaptiveVariant::AdaptTheta1Theta3 => (d[1], d[0]),
        NetworkAdaptiveVariant::AdaptTheta3Theta4 => (d[0], d[1]),
    };
    state.sign_gain += h * d_sign;
    state.linear_gain += h * d_linear;
    Ok(d)
}

/// Gain hook for the adaptive network rules.
#[derive(Clone, Debug)]
pub struct NetworkAdaptiveHook {
    pub spec: NetworkAdaptiveSpec,
    pub rate: RateFunction,
    pub profile: DelayProfile,
    pub zero_tol: f64,
    tracker: WindowSupTracker,
    modes: Vec<GainMode>,
}

impl NetworkAdaptiveHook {
    pub fn new(spec: NetworkAdaptiveSpec, rate: RateFunction, profile: DelayProfile, zero_tol: f64) -> Self {
        Self {
            spec,
            rate,
            profile,
            zero_tol,
            tracker: WindowSupTracker::new(WindowFunctional::SqNorm2).allow_prehistory(),
            modes: Vec::new(),
        }
    }

    pub fn modes(&self) -> &[GainMode] {
        &self.modes
    }
}

impl GainHook for NetworkAdaptiveHook {
    fn names(&self) -> Vec<String> {
        self.spec.variant.gain_names().iter().map(|s| s.to_string()).collect()
    }

    fn initial(&self) -> Vec<f64> {
        vec![0.0, 0.0]
    }

    fn rates(&mut self, history: &HistoryTrajectory, _gains: &[f64], out: &mut [f64]) -> Result<()> {
        let sup = self.tracker.update(history, &self.profile)?;
        let mode = GainMode::classify(sup, true, self.zero_tol);
        self.modes.push(mode);
        let t = history.current_time();
        let s: f64 = history.last_state().iter().map(|v| v * v).sum();
        let d = network_gain_rates(mode, self.spec.variant, &self.spec.rates, self.rate.value(t), s);
        out.copy_from_slice(&d);
        Ok(())
    }
}
