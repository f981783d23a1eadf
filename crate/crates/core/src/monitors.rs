//! Lyapunov-Krasovskii style monitors evaluated along computed trajectories:
//! functionals `V` and their delayed-window maxima `W`, contact points where
//! `V = W`, the Phase I/II boundary `T1`, the linear decay envelope, and the
//! measured settling time.

use serde::{Deserialize, Serialize};

use crate::conditions::ConditionReport;
use crate::delay::{DelayProfile, RateFunction};
use crate::error::{Error, Result};
use crate::history::{HistoryTrajectory, SlidingMax, WindowFunctional};

/// Relative tolerance for `|V - W|` at a contact point.
pub const TRACE_TOL: f64 = 1e-9;
/// Absolute slack on the numerical derivative at contact points.
pub const DERIV_TOL: f64 = 1e-6;
/// Slack on the Phase II envelope.
pub const ENVELOPE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionalId {
    V1,
    V2,
    V3,
    V4,
    V5,
    V6,
    V7,
    V8,
    Vbar1,
    Vbar2,
    Vbar3,
    Vbar4,
    Vbar5,
    Vbar6,
    Vbar7,
    Vbar8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Base {
    /// `μ(t) F(p)`
    Weighted,
    /// `norm(p) + ε2 t`
    Linear,
}

impl FunctionalId {
    pub const ALL: [FunctionalId; 16] = [
        FunctionalId::V1,
        FunctionalId::V2,
        FunctionalId::V3,
        FunctionalId::V4,
        FunctionalId::V5,
        FunctionalId::V6,
        FunctionalId::V7,
        FunctionalId::V8,
        FunctionalId::Vbar1,
        FunctionalId::Vbar2,
        FunctionalId::Vbar3,
        FunctionalId::Vbar4,
        FunctionalId::Vbar5,
        FunctionalId::Vbar6,
        FunctionalId::Vbar7,
        FunctionalId::Vbar8,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FunctionalId::V1 => "V1",
            FunctionalId::V2 => "V2",
            FunctionalId::V3 => "V3",
            FunctionalId::V4 => "V4",
            FunctionalId::V5 => "V5",
            FunctionalId::V6 => "V6",
            FunctionalId::V7 => "V7",
            FunctionalId::V8 => "V8",
            FunctionalId::Vbar1 => "Vbar1",
            FunctionalId::Vbar2 => "Vbar2",
            FunctionalId::Vbar3 => "Vbar3",
            FunctionalId::Vbar4 => "Vbar4",
            FunctionalId::Vbar5 => "Vbar5",
            FunctionalId::Vbar6 => "Vbar6",
            FunctionalId::Vbar7 => "Vbar7",
            FunctionalId::Vbar8 => "Vbar8",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(name))
    }

    fn base(&self) -> Base {
        use FunctionalId::*;
        match self {
            V1 | V3 | V5 | V7 | Vbar1 | Vbar3 | Vbar5 | Vbar7 => Base::Weighted,
            _ => Base::Linear,
        }
    }

    /// Network functionals weight node blocks by `ξ`.
    pub fn needs_xi(&self) -> bool {
        use FunctionalId::*;
        matches!(self, Vbar1 | Vbar2 | Vbar3 | Vbar4)
    }

    pub fn needs_eps2(&self) -> bool {
        self.base() == Base::Linear
    }

    /// The state functional inside `V`: quadratic for the 2-norm families,
    /// plain norms otherwise.
    fn state_functional(&self, xi: Option<&[f64]>) -> WindowFunctional {
        use FunctionalId::*;
        match self {
            V1 | V2 | V3 | V4 => WindowFunctional::SqNorm2,
            V5 | V6 | Vbar5 | Vbar6 => WindowFunctional::Norm1,
            V7 | V8 | Vbar7 | Vbar8 => WindowFunctional::NormInf,
            Vbar1 | Vbar2 | Vbar3 | Vbar4 => WindowFunctional::WeightedSq(xi.unwrap_or(&[]).to_vec()),
        }
    }
}

/// Quadratic penalty `weight (g(t) - target)^2` on a recorded gain column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainPenalty {
    pub column: usize,
    pub target: f64,
    pub weight: f64,
}

/// Inputs some functionals need.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FunctionalParams {
    /// Node weights of the network functionals.
    pub xi: Option<Vec<f64>>,
    pub eps2: Option<f64>,
    pub penalties: Vec<GainPenalty>,
}

/// `V` and `W` on the trajectory grid from `start` on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovTrace {
    pub functional_id: FunctionalId,
    pub start: f64,
    /// Index of `times[0]` in the trajectory grid.
    pub first_index: usize,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub window_sups: Vec<f64>,
    pub contact_times: Vec<f64>,
    /// Offsets into `times` of the contact points.
    pub contact_indices: Vec<usize>,
}

struct Evaluator<'a> {
    id: FunctionalId,
    state_fn: WindowFunctional,
    rate: &'a RateFunction,
    eps2: f64,
    penalties: &'a [GainPenalty],
}

impl Evaluator<'_> {
    fn eval(&self, t: f64, x: &[f64], gains: &[f64]) -> f64 {
        let core = match self.id.base() {
            Base::Weighted => self.rate.value(t) * self.state_fn.eval(x),
            Base::Linear => self.state_fn.norm(x) + self.eps2 * t,
        };
        core + self
            .penalties
            .iter()
            .map(|p| {
                let d = gains.get(p.column).copied().unwrap_or(0.0) - p.target;
                p.weight * d * d
            })
            .sum::<f64>()
    }
}

/// Window left end value of a grid series, reading the constant initial
/// history for windows that reach before `t0`.
fn left_value(traj: &HistoryTrajectory, left: f64, x: &mut [f64], g: &mut [f64]) -> Result<f64> {
    let s = left.max(traj.t0());
    traj.query(s, x)?;
    traj.query_gains(s, g)?;
    Ok(s)
}

/// Window sup of `value(t, x, gains)` at every grid point.
fn window_series(
    traj: &HistoryTrajectory,
    profile: &DelayProfile,
    value: impl Fn(f64, &[f64], &[f64]) -> f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut v = Vec::with_capacity(traj.len());
    let mut w = Vec::with_capacity(traj.len());
    let mut max = SlidingMax::new();
    let mut x = vec![0.0; traj.dim()];
    let mut g = vec![0.0; traj.gain_dim()];
    for k in 0..traj.len() {
        let t = traj.time(k);
        let vk = value(t, traj.state(k), traj.gains(k));
        v.push(vk);
        max.push(k, vk);
        let left = profile.window_start(t);
        let s = left_value(traj, left, &mut x, &mut g)?;
        let boundary = value(s, &x, &g);
        let (lo, _) = traj.grid_range(left, t);
        w.push(max.max_from(lo.min(k)).map_or(boundary, |m| m.max(boundary)));
    }
    Ok((v, w))
}

/// Evaluate a functional and its window maximum from `start` on.
pub fn trace_functional(
    traj: &HistoryTrajectory,
    id: FunctionalId,
    rate: &RateFunction,
    profile: &DelayProfile,
    params: &FunctionalParams,
    start: f64,
) -> Result<LyapunovTrace> {
    if id.needs_xi() && params.xi.is_none() {
        return Err(Error::MissingInput { functional: id.name(), missing: "xi" });
    }
    if id.needs_eps2() && params.eps2.is_none() {
        return Err(Error::MissingInput { functional: id.name(), missing: "eps2" });
    }
    if let Some(xi) = &params.xi {
        if id.needs_xi() && (xi.is_empty() || !traj.dim().is_multiple_of(xi.len())) {
            return Err(Error::DimensionMismatch { expected: traj.dim(), got: xi.len() });
        }
    }
    let ev = Evaluator {
        id,
        state_fn: id.state_functional(params.xi.as_deref()),
        rate,
        eps2: params.eps2.unwrap_or(0.0),
        penalties: &params.penalties,
    };
    let (v, w) = window_series(traj, profile, |t, x, g| ev.eval(t, x, g))?;
    let first = traj.times().position(|t| t >= start - 1e-9 * traj.step()).unwrap_or(traj.len());
    let mut trace = LyapunovTrace {
        functional_id: id,
        start,
        first_index: first,
        times: traj.times().skip(first).collect(),
        values: v[first..].to_vec(),
        window_sups: w[first..].to_vec(),
        contact_times: Vec::new(),
        contact_indices: Vec::new(),
    };
    for (i, (vv, ww)) in trace.values.iter().zip(&trace.window_sups).enumerate() {
        if (vv - ww).abs() <= TRACE_TOL * ww.abs() {
            trace.contact_indices.push(i);
            trace.contact_times.push(trace.times[i]);
        }
    }
    Ok(trace)
}

/// Restrict a trace to `[from, to)`.
pub fn restrict(trace: &LyapunovTrace, from: f64, to: f64) -> LyapunovTrace {
    let keep: Vec<usize> = (0..trace.times.len()).filter(|&i| trace.times[i] >= from && trace.times[i] < to).collect();
    let (lo, hi) = match (keep.first(), keep.last()) {
        (Some(&a), Some(&b)) => (a, b + 1),
        _ => (0, 0),
    };
    let contacts: Vec<usize> = trace.contact_indices.iter().filter(|&&i| i >= lo && i < hi).map(|&i| i - lo).collect();
    LyapunovTrace {
        functional_id: trace.functional_id,
        start: trace.start.max(from),
        first_index: trace.first_index + lo,
        times: trace.times[lo..hi].to_vec(),
        values: trace.values[lo..hi].to_vec(),
        window_sups: trace.window_sups[lo..hi].to_vec(),
        contact_times: contacts.iter().map(|&i| trace.times[lo + i]).collect(),
        contact_indices: contacts,
    }
}

/// One checked contact point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactCheck {
    pub time: f64,
    pub derivative: f64,
    pub pass: bool,
    /// The state is at the origin (norm within `zero_tol`), where the
    /// decrease argument is not needed.
    pub at_origin: bool,
}

/// Numerical `dV/dt` at each contact point of `trace`, by central
/// differences on the grid (one-sided at the ends). A point passes when
/// `dV/dt < DERIV_TOL`, or when the state sits at the origin.
///
/// `report` is informational: infeasible gains are allowed so that
/// failing contact points can be inspected.
pub fn contact_point_decrease(
    trace: &LyapunovTrace,
    traj: &HistoryTrajectory,
    report: Option<&ConditionReport>,
    zero_tol: f64,
) -> Vec<ContactCheck> {
    let _ = report;
    let n = trace.values.len();
    let h = traj.step();
    trace
        .contact_indices
        .iter()
        .map(|&i| {
            let derivative = if n < 2 {
                0.0
            } else if i == 0 {
                (trace.values[1] - trace.values[0]) / h
            } else if i == n - 1 {
                (trace.values[n - 1] - trace.values[n - 2]) / h
            } else {
                (trace.values[i + 1] - trace.values[i - 1]) / (2.0 * h)
            };
            let x = traj.state(trace.first_index + i);
            let at_origin = x.iter().map(|v| v * v).sum::<f64>().sqrt() <= zero_tol;
            ContactCheck { time: trace.times[i], derivative, pass: at_origin || derivative < DERIV_TOL, at_origin }
        })
        .collect()
}

/// Count of failing contact points.
pub fn failures(checks: &[ContactCheck]) -> usize {
    checks.iter().filter(|c| !c.pass).count()
}

/// Phase boundary, envelope check and settling time of one run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    /// First grid time at which the window sup of the Phase I functional is
    /// at most 1; `f64::INFINITY` if never.
    pub t1: f64,
    /// First grid time after which the norm stays within `zero_tol`;
    /// `f64::INFINITY` if never.
    pub t_settle: f64,
    /// Grid points in `(T1, T_settle]` above `1 - ε2 (t - T1) + ENVELOPE_TOL`.
    pub envelope_violations: usize,
    pub eps2: f64,
}

impl PhaseReport {
    pub fn reached_unit_window(&self) -> bool {
        self.t1.is_finite()
    }

    pub fn settled(&self) -> bool {
        self.t_settle.is_finite()
    }
}

/// First grid time after which `functional.norm` stays within `zero_tol`.
pub fn settling_time_by(traj: &HistoryTrajectory, functional: &WindowFunctional, zero_tol: f64) -> f64 {
    let mut first = None;
    for k in (0..traj.len()).rev() {
        if functional.norm(traj.state(k)) <= zero_tol {
            first = Some(k);
        } else {
            break;
        }
    }
    first.map_or(f64::INFINITY, |k| traj.time(k))
}

/// Window sups of a state functional at every grid time.
pub fn window_sup_series(
    traj: &HistoryTrajectory,
    profile: &DelayProfile,
    functional: &WindowFunctional,
) -> Result<Vec<f64>> {
    Ok(window_series(traj, profile, |_, x, _| functional.eval(x))?.1)
}

/// Detect `T1`, count envelope violations and measure settling. The
/// functional selects the norm: `p^T p` and `ξ`-weighted sums are compared
/// with 1 directly and enveloped by their square roots.
pub fn detect_phases(
    traj: &HistoryTrajectory,
    profile: &DelayProfile,
    functional: &WindowFunctional,
    eps2: f64,
    zero_tol: f64,
) -> Result<PhaseReport> {
    let sups = window_sup_series(traj, profile, functional)?;
    let t1 = sups.iter().position(|&s| s <= 1.0).map_or(f64::INFINITY, |k| traj.time(k));
    let t_settle = settling_time_by(traj, functional, zero_tol);
    let mut violations = 0;
    if t1.is_finite() {
        for k in 0..traj.len() {
            let t = traj.time(k);
            if t <= t1 || t > t_settle {
                continue;
            }
            if functional.norm(traj.state(k)) > 1.0 - eps2 * (t - t1) + ENVELOPE_TOL {
                violations += 1;
            }
        }
    }
    Ok(PhaseReport { t1, t_settle, envelope_violations: violations, eps2 })
}

/// Largest increase of `W` between consecutive grid points of `trace`.
pub fn max_window_increase(trace: &LyapunovTrace) -> f64 {
    trace.window_sups.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}

/// CSV with columns `t,V,W,contact`.
pub fn trace_csv(trace: &LyapunovTrace) -> String {
    let mut out = String::from("t,V,W,contact\n");
    let mut contacts = trace.contact_indices.iter().peekable();
    for i in 0..trace.times.len() {
        let c = if contacts.peek() == Some(&&i) {
            contacts.next();
            1
        } else {
            0
        };
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{}\n",
            trace.times[i], trace.values[i], trace.window_sups[i], c
        ));
    }
    out
}
