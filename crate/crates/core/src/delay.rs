//! Delay profiles `π_i(t)` with a common envelope `π(t)`, and the rate
//! functions `μ(t)` whose asymptotic constants `β` and `η` feed every
//! sufficient condition in [`crate::conditions`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A delay evaluator `t -> π(t)`.
pub type DelayFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum DelayKind {
    /// `π_i(t) = q t` for every component, `0 < q < 1`.
    Proportional { q: f64 },
    /// `π_i(t) = π` for every component.
    Constant { pi: f64 },
    /// Pairwise delays of a network with `nodes` nodes:
    /// `π_ij(t) = scale (1 - amplitude |sin(i + 2j)|) t` with 1-based labels
    /// `i, j`. Component index of the pair is `i_0 * nodes + j_0` (0-based).
    /// Envelope is `scale * t`.
    PerComponentSin { scale: f64, amplitude: f64, nodes: usize },
    /// Tabulated delays, linearly interpolated between `times` and held
    /// constant outside. `values[i][k]` is component `i` at `times[k]`.
    CustomGrid { times: Vec<f64>, values: Vec<Vec<f64>> },
    /// Arbitrary per-component evaluators with a user-supplied envelope.
    PerComponent { delays: Vec<DelayFn>, envelope: DelayFn },
}

impl fmt::Debug for DelayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DelayKind::Proportional { q } => f.debug_struct("Proportional").field("q", q).finish(),
            DelayKind::Constant { pi } => f.debug_struct("Constant").field("pi", pi).finish(),
            DelayKind::PerComponentSin { scale, amplitude, nodes } => f
                .debug_struct("PerComponentSin")
                .field("scale", scale)
                .field("amplitude", amplitude)
                .field("nodes", nodes)
                .finish(),
            DelayKind::CustomGrid { times, values } => {
                f.debug_struct("CustomGrid").field("points", &times.len()).field("components", &values.len()).finish()
            }
            DelayKind::PerComponent { delays, .. } => {
                f.debug_struct("PerComponent").field("components", &delays.len()).finish()
            }
        }
    }
}

/// Per-component delay functions together with their common envelope.
#[derive(Clone, Debug)]
pub struct DelayProfile {
    kind: DelayKind,
    components: usize,
}

impl DelayProfile {
    pub fn proportional(q: f64, components: usize) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(invalid("q", format!("proportional ratio must lie in (0, 1), got {q}")));
        }
        Ok(Self { kind: DelayKind::Proportional { q }, components })
    }

    pub fn constant(pi: f64, components: usize) -> Result<Self> {
        if !(pi >= 0.0 && pi.is_finite()) {
            return Err(invalid("pi", format!("constant delay must be finite and >= 0, got {pi}")));
        }
        Ok(Self { kind: DelayKind::Constant { pi }, components })
    }

    pub fn per_component_sin(scale: f64, amplitude: f64, nodes: usize) -> Result<Self> {
        if !(scale > 0.0 && scale < 1.0) {
            return Err(invalid("scale", format!("must lie in (0, 1), got {scale}")));
        }
        if !(0.0..=1.0).contains(&amplitude) {
            return Err(invalid("amplitude", format!("must lie in [0, 1], got {amplitude}")));
        }
        if nodes == 0 {
            return Err(invalid("nodes", "must be positive"));
        }
        Ok(Self { kind: DelayKind::PerComponentSin { scale, amplitude, nodes }, components: nodes * nodes })
    }

    /// Tabulated delays. `t - π_i(t)` must be nondecreasing between nodes
    /// and every value must be nonnegative.
    pub fn custom_grid(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() {
            return Err(invalid("times", "grid is empty"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("times", "grid must be strictly increasing"));
        }
        if values.is_empty() {
            return Err(invalid("values", "no components"));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != times.len() {
                return Err(invalid(
                    "values",
                    format!("component {i} has {} samples, grid has {}", row.len(), times.len()),
                ));
            }
            if row.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(invalid("values", format!("component {i} has a negative or non-finite delay")));
            }
            for k in 1..times.len() {
                if times[k] - row[k] < times[k - 1] - row[k - 1] {
                    return Err(invalid(
                        "values",
                        format!("t - delay decreases for component {i} near t = {}", times[k]),
                    ));
                }
            }
        }
        let components = values.len();
        Ok(Self { kind: DelayKind::CustomGrid { times, values }, components })
    }

    pub fn per_component(delays: Vec<DelayFn>, envelope: DelayFn) -> Result<Self> {
        if delays.is_empty() {
            return Err(invalid("delays", "no components"));
        }
        let components = delays.len();
        Ok(Self { kind: DelayKind::PerComponent { delays, envelope }, components })
    }

    pub fn kind(&self) -> &DelayKind {
        &self.kind
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub(crate) fn kind_name(&self) -> &'static str {
        match self.kind {
            DelayKind::Proportional { .. } => "proportional",
            DelayKind::Constant { .. } => "constant",
            DelayKind::PerComponentSin { .. } => "per_component_sin",
            DelayKind::CustomGrid { .. } => "custom_grid",
            DelayKind::PerComponent { .. } => "per_component",
        }
    }

    /// `π_i(t)`.
    pub fn eval(&self, i: usize, t: f64) -> Result<f64> {
        if i >= self.components {
            return Err(Error::IndexOutOfRange { index: i, count: self.components });
        }
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        Ok(self.eval_unchecked(i, t))
    }

    /// Delay of the network pair `(i, j)`, 0-based node indices.
    pub fn eval_pair(&self, i: usize, j: usize, t: f64) -> Result<f64> {
        let nodes = match self.kind {
            DelayKind::PerComponentSin { nodes, .. } => nodes,
            _ => (self.components as f64).sqrt().round() as usize,
        };
        if i >= nodes || j >= nodes {
            return Err(Error::IndexOutOfRange { index: i.max(j), count: nodes });
        }
        self.eval(i * nodes + j, t)
    }

    pub(crate) fn eval_unchecked(&self, i: usize, t: f64) -> f64 {
        match &self.kind {
            DelayKind::Proportional { q } => q * t,
            DelayKind::Constant { pi } => *pi,
            DelayKind::PerComponentSin { scale, amplitude, nodes } => {
                let (a, b) = ((i / nodes + 1) as f64, (i % nodes + 1) as f64);
                scale * (1.0 - amplitude * (a + 2.0 * b).sin().abs()) * t
            }
            DelayKind::CustomGrid { times, values } => interp_clamped(times, &values[i], t),
            DelayKind::PerComponent { delays, .. } => delays[i](t),
        }
    }

    /// The common envelope `π(t) >= π_i(t)`.
    pub fn envelope(&self, t: f64) -> f64 {
        match &self.kind {
            DelayKind::Proportional { q } => q * t,
            DelayKind::Constant { pi } => *pi,
            DelayKind::PerComponentSin { scale, .. } => scale * t,
            DelayKind::CustomGrid { times, values } => {
                values.iter().map(|row| interp_clamped(times, row, t)).fold(0.0, f64::max)
            }
            DelayKind::PerComponent { envelope, .. } => envelope(t),
        }
    }

    /// Left end `t - π(t)` of the maximum-value window at `t`.
    pub fn window_start(&self, t: f64) -> f64 {
        t - self.envelope(t)
    }
}

fn interp_clamped(times: &[f64], values: &[f64], t: f64) -> f64 {
    let last = times.len() - 1;
    if t <= times[0] {
        return values[0];
    }
    if t >= times[last] {
        return values[last];
    }
    let k = times.partition_point(|&s| s <= t) - 1;
    let w = (t - times[k]) / (times[k + 1] - times[k]);
    values[k] + w * (values[k + 1] - values[k])
}

/// The weight `μ(t)` of the delayed Lyapunov functionals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateFunction {
    /// `μ(t) = t^ρ`.
    Power { rho: f64 },
    /// `μ(t) = e^{ϖ t}`.
    Exponential { varpi: f64 },
}

impl RateFunction {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RateFunction::Power { rho } if !(rho > 0.0 && rho.is_finite()) => {
                Err(invalid("rho", format!("power exponent must be positive, got {rho}")))
            }
            RateFunction::Exponential { varpi } if !(varpi > 0.0 && varpi.is_finite()) => {
                Err(invalid("varpi", format!("exponential rate must be positive, got {varpi}")))
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            RateFunction::Power { rho } => t.max(0.0).powf(rho),
            RateFunction::Exponential { varpi } => (varpi * t).exp(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            RateFunction::Power { rho } if t > 0.0 => rho * t.powf(rho - 1.0),
            RateFunction::Power { .. } => 0.0,
            RateFunction::Exponential { varpi } => varpi * (varpi * t).exp(),
        }
    }

    /// Default start of the monitored horizon: 1 for power rates (where
    /// `μ(0) = 0`), 0 for exponential rates.
    pub fn default_monitor_start(&self) -> f64 {
        match self {
            RateFunction::Power { .. } => 1.0,
            RateFunction::Exponential { .. } => 0.0,
        }
    }

    pub(crate) fn kind_name(&self) -> &'static str {
        match self {
            RateFunction::Power { .. } => "power",
            RateFunction::Exponential { .. } => "exponential",
        }
    }
}

/// `β = limsup μ'(t)/μ(t)` and `η = limsup μ(t)/μ(t - π(t)) - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Asymptotics {
    pub beta: f64,
    pub eta: f64,
}

impl Asymptotics {
    /// User-supplied constants, for delay classes without a closed form.
    pub fn manual(beta: f64, eta: f64) -> Result<Self> {
        if !(eta >= 0.0) || !eta.is_finite() || !beta.is_finite() {
            return Err(invalid("eta", format!("need finite beta and eta >= 0, got ({beta}, {eta})")));
        }
        Ok(Self { beta, eta })
    }

    /// Delay-free limit: `β = η = 0`.
    pub fn delay_free() -> Self {
        Self { beta: 0.0, eta: 0.0 }
    }
}

/// Closed-form `(β, η)` for the two families with known limits: power rates
/// over proportional envelopes and exponential rates over constant delays.
pub fn asymptotics(rate: &RateFunction, profile: &DelayProfile) -> Result<Asymptotics> {
    rate.validate()?;
    let no_closed_form = || Error::NoClosedForm { rate: rate.kind_name(), delay: profile.kind_name() };
    match (*rate, profile.kind()) {
        (RateFunction::Power { rho }, DelayKind::Proportional { q })
        | (RateFunction::Power { rho }, DelayKind::PerComponentSin { scale: q, .. }) => {
            Ok(Asymptotics { beta: 0.0, eta: (1.0 - q).powf(-rho) - 1.0 })
        }
        (RateFunction::Exponential { varpi }, DelayKind::Constant { pi }) => {
            Ok(Asymptotics { beta: varpi, eta: (varpi * pi).exp_m1() })
        }
        _ => Err(no_closed_form()),
    }
}
