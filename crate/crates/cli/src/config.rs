//! JSON experiment configuration (`schema_version` 1).
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "experiment": "scalar",
//!   "scalar": { "c1": 1.0, "c2": 2.0, "initial": [2.0], "gains": { "c3": 2.1, "c4": 3.5 } },
//!   "delay": { "kind": "proportional", "q": 0.5 },
//!   "rate": { "kind": "power", "rho": 0.1 },
//!   "integrator": { "h": 0.001, "horizon": 30.0 }
//! }
//! ```

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use delayfts_core::control::{AdaptiveRates, NetworkAdaptiveSpec, NetworkAdaptiveVariant, NetworkControlKind};
use delayfts_core::network::{lorenz_preset, CouplingFn, NetworkModel, NodeDynamics, SyncExperiment, SyncMode};
use delayfts_core::scalar::{ScalarExperiment, ScalarSystem};
use delayfts_core::{
    DelayProfile, IntegratorConfig, Method, NetworkControlSpec, Norm, RateFunction, StaticScalarGains,
};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Scalar,
    Network,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalar: Option<ScalarBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay: Option<DelayBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<RateFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitor: Option<MonitorBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputBlock>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarBlock {
    pub c1: f64,
    pub c2: f64,
    pub initial: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<GainsBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive: Option<AdaptiveBlock>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsBlock {
    pub c3: f64,
    pub c4: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveBlock {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    #[serde(default)]
    pub norm: Norm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Lorenz,
}

/// Network model. With a preset, explicit fields override the preset's.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    /// Row-major coupling matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    /// Row-major delayed-coupling matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeDynamics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<Vec<f64>>,
    /// Reference `φ(0)`; selects inner synchronization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlBlock>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    None,
    Pinning,
    FullNode,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlBlock {
    pub kind: ControlKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub theta3: f64,
    #[serde(default)]
    pub theta4: f64,
    /// Adapt `θ1, θ3` (pinning) or `θ3, θ4` (full node) from zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive: Option<RatesBlock>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesBlock {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DelayBlock {
    Proportional {
        q: f64,
    },
    Constant {
        pi: f64,
    },
    /// Network pairs only: `scale (1 - amplitude |sin(i + 2j)|) t`.
    PerComponentSin {
        scale: f64,
        amplitude: f64,
    },
    /// Tabulated delays, one row per component (per pair for networks),
    /// linearly interpolated and held constant outside the grid.
    CustomGrid {
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_band: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorBlock {
    /// Time from which `μ`-weighted functionals are evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Fixed `ε1` for the 2-norm and network conditions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps1: Option<f64>,
    /// Overrides `ε2` for the envelope and the linear functionals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps2: Option<f64>,
    #[serde(default)]
    pub synchronous_delays: bool,
    /// Functional written by the `monitor` subcommand, e.g. `V1`, `Vbar1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<String>,
}

impl Default for MonitorBlock {
    fn default() -> Self {
        Self {
            start: None,
            kappa: default_kappa(),
            eps1: None,
            eps2: None,
            synchronous_delays: false,
            functional: None,
        }
    }
}

fn default_kappa() -> f64 {
    0.9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { dir: None, stride: default_stride() }
    }
}

fn default_stride() -> usize {
    1
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Config { field: field.into(), message: message.into() }
}

/// Attach `block` to a core error so the message names the field.
fn within(block: &str) -> impl Fn(delayfts_core::Error) -> CliError + '_ {
    move |e| match e {
        delayfts_core::Error::InvalidParameter { name, reason } => field_err(format!("{block}.{name}"), reason),
        other => field_err(block, other.to_string()),
    }
}

fn matrix(field: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>, CliError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(field_err(field, "expected a nonempty square matrix (list of rows)"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Parsed configuration ready to run.
#[derive(Clone, Debug)]
pub enum Plan {
    Scalar(ScalarPlan),
    Network(NetworkPlan),
}

#[derive(Clone, Debug)]
pub struct ScalarPlan {
    pub experiment: ScalarExperiment,
    pub delay: DelayProfile,
    pub rate: RateFunction,
    pub norm: Norm,
    pub c1: f64,
    pub c2: f64,
    /// `None` for adaptive runs.
    pub gains: Option<StaticScalarGains>,
    pub monitor: MonitorBlock,
    pub output: OutputBlock,
}

#[derive(Clone, Debug)]
pub struct NetworkPlan {
    pub experiment: SyncExperiment,
    pub monitor: MonitorBlock,
    pub output: OutputBlock,
}

impl Plan {
    pub fn monitor(&self) -> &MonitorBlock {
        match self {
            Plan::Scalar(p) => &p.monitor,
            Plan::Network(p) => &p.monitor,
        }
    }

    pub fn output(&self) -> &OutputBlock {
        match self {
            Plan::Scalar(p) => &p.output,
            Plan::Network(p) => &p.output,
        }
    }

    pub fn integrator(&self) -> &IntegratorConfig {
        match self {
            Plan::Scalar(p) => &p.experiment.integrator,
            Plan::Network(p) => &p.experiment.integrator,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            field_err(if path == "." { "(root)".to_string() } else { path }, e.inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self, CliError> {
        Self::from_json(&value.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Structural checks; value checks happen in [`ExperimentConfig::plan`].
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(field_err(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        match self.experiment {
            ExperimentKind::Scalar => {
                let s = self.scalar.as_ref().ok_or_else(|| field_err("scalar", "required for scalar experiments"))?;
                if self.network.is_some() {
                    return Err(field_err("network", "not allowed in scalar experiments"));
                }
                match (&s.gains, &s.adaptive) {
                    (Some(_), Some(_)) => {
                        return Err(field_err("scalar.adaptive", "give either gains or adaptive, not both"))
                    }
                    (None, None) => return Err(field_err("scalar.gains", "give either gains or adaptive")),
                    _ => {}
                }
                if s.initial.is_empty() {
                    return Err(field_err("scalar.initial", "initial state is empty"));
                }
            }
            ExperimentKind::Network => {
                if self.network.is_none() {
                    return Err(field_err("network", "required for network experiments"));
                }
                if self.scalar.is_some() {
                    return Err(field_err("scalar", "not allowed in network experiments"));
                }
            }
        }
        if let Some(m) = &self.monitor {
            if !(m.kappa > 0.0 && m.kappa < 1.0) {
                return Err(field_err("monitor.kappa", format!("must lie in (0, 1), got {}", m.kappa)));
            }
        }
        if let Some(o) = &self.output {
            if o.stride == 0 {
                return Err(field_err("output.stride", "must be at least 1"));
            }
        }
        Ok(())
    }

    fn integrator_config(&self, default: IntegratorConfig) -> Result<IntegratorConfig, CliError> {
        let b = self.integrator.unwrap_or_default();
        let cfg = IntegratorConfig {
            t0: b.t0.unwrap_or(default.t0),
            h: b.h.unwrap_or(default.h),
            horizon: b.horizon.unwrap_or(default.horizon),
            method: b.method.unwrap_or(default.method),
            zero_band: b.zero_band.or(default.zero_band),
            zero_tol: b.zero_tol.unwrap_or(default.zero_tol),
        };
        cfg.validate().map_err(within("integrator"))?;
        Ok(cfg)
    }

    fn delay_profile(
        &self,
        components: usize,
        nodes: Option<usize>,
        default: Option<DelayProfile>,
    ) -> Result<DelayProfile, CliError> {
        let Some(block) = self.delay.clone() else {
            return default.ok_or_else(|| field_err("delay", "required"));
        };
        match block {
            DelayBlock::Proportional { q } => DelayProfile::proportional(q, components),
            DelayBlock::Constant { pi } => DelayProfile::constant(pi, components),
            DelayBlock::PerComponentSin { scale, amplitude } => match nodes {
                Some(n) => DelayProfile::per_component_sin(scale, amplitude, n),
                None => return Err(field_err("delay.kind", "per_component_sin applies to networks only")),
            },
            DelayBlock::CustomGrid { times, values } => {
                if values.len() != components {
                    return Err(field_err("delay.values", format!("expected {components} rows, got {}", values.len())));
                }
                DelayProfile::custom_grid(times, values)
            }
        }
        .map_err(within("delay"))
    }

    pub fn plan(&self) -> Result<Plan, CliError> {
        self.validate()?;
        let monitor = self.monitor.clone().unwrap_or_default();
        let output = self.output.clone().unwrap_or_default();
        match self.experiment {
            ExperimentKind::Scalar => {
                let s = self.scalar.as_ref().expect("validated");
                let m = s.initial.len();
                let delay = self.delay_profile(m, None, None)?;
                let rate = self.rate.unwrap_or(RateFunction::Power { rho: 0.1 });
                rate.validate().map_err(within("rate"))?;
                let integrator = self.integrator_config(IntegratorConfig::new(1e-3, 30.0))?;
                let (system, adaptive, gains, norm) = match (&s.gains, &s.adaptive) {
                    (Some(g), _) => {
                        let gains = StaticScalarGains::new(s.c1, s.c2, g.c3, g.c4).map_err(within("scalar.gains"))?;
                        (
                            ScalarSystem::with_static(gains, delay.clone()).map_err(within("scalar.gains"))?,
                            None,
                            Some(gains),
                            Norm::Two,
                        )
                    }
                    (None, Some(a)) => {
                        let rates = AdaptiveRates::new(a.d1, a.d2, a.d3).map_err(within("scalar.adaptive"))?;
                        (
                            ScalarSystem::with_adaptive(s.c1, s.c2, delay.clone()),
                            Some((rates, a.norm, rate)),
                            None,
                            a.norm,
                        )
                    }
                    (None, None) => unreachable!("validated"),
                };
                let experiment = ScalarExperiment { system, initial: s.initial.clone(), integrator, adaptive };
                Ok(Plan::Scalar(ScalarPlan {
                    experiment,
                    delay,
                    rate,
                    norm,
                    c1: s.c1,
                    c2: s.c2,
                    gains,
                    monitor,
                    output,
                }))
            }
            ExperimentKind::Network => {
                let nb = self.network.as_ref().expect("validated");
                Ok(Plan::Network(NetworkPlan { experiment: self.network_experiment(nb)?, monitor, output }))
            }
        }
    }

    fn network_experiment(&self, nb: &NetworkBlock) -> Result<SyncExperiment, CliError> {
        let preset = nb.preset.map(|Preset::Lorenz| lorenz_preset());
        let base = preset.as_ref();
        let a = match &nb.a {
            Some(rows) => matrix("network.a", rows)?,
            None => {
                base.map(|p| p.model.a.clone()).ok_or_else(|| field_err("network.a", "required without a preset"))?
            }
        };
        let b = match &nb.b {
            Some(rows) => matrix("network.b", rows)?,
            None => {
                base.map(|p| p.model.b.clone()).ok_or_else(|| field_err("network.b", "required without a preset"))?
            }
        };
        let pick = |v: Option<f64>, d: Option<f64>, name: &str| {
            v.or(d).ok_or_else(|| field_err(format!("network.{name}"), "required without a preset"))
        };
        let theta1 = pick(nb.theta1, base.map(|p| p.model.theta1), "theta1")?;
        let theta2 = pick(nb.theta2, base.map(|p| p.model.theta2), "theta2")?;
        let f = nb
            .node
            .clone()
            .or_else(|| base.map(|p| p.model.f.clone()))
            .ok_or_else(|| field_err("network.node", "required without a preset"))?;
        let g = nb
            .coupling
            .or(base.map(|p| p.model.g))
            .ok_or_else(|| field_err("network.coupling", "required without a preset"))?;
        let lipschitz_f = pick(nb.lipschitz_f, base.map(|p| p.model.lipschitz_f), "lipschitz_f")?;
        let nodes = a.nrows();
        let delay = self.delay_profile(nodes * nodes, Some(nodes), base.map(|p| p.model.delays.clone()))?;
        let model = NetworkModel::new(a, b, theta1, theta2, f, g, lipschitz_f, delay).map_err(within("network"))?;

        let (base_drive, base_response) = match base.map(|p| &p.mode) {
            Some(SyncMode::Outer { drive, response }) => (Some(drive.clone()), Some(response.clone())),
            _ => (None, None),
        };
        let response =
            nb.response.clone().or(base_response).ok_or_else(|| field_err("network.response", "required"))?;
        let mode = match (&nb.reference, &nb.drive) {
            (Some(_), Some(_)) => {
                return Err(field_err("network.reference", "give either drive or reference, not both"))
            }
            (Some(r), None) => SyncMode::Inner { reference: r.clone(), response },
            (None, d) => SyncMode::Outer {
                drive: d.clone().or(base_drive).ok_or_else(|| field_err("network.drive", "required"))?,
                response,
            },
        };
        let control = match nb.control {
            None => None,
            Some(c) => control_spec(&c)?,
        };
        let default_integrator = base.map_or(IntegratorConfig::new(1e-3, 20.0), |p| p.integrator.clone());
        let rate = self.rate.unwrap_or(RateFunction::Power { rho: 0.1 });
        rate.validate().map_err(within("rate"))?;
        let exp =
            SyncExperiment { model, mode, control, integrator: self.integrator_config(default_integrator)?, rate };
        exp.validate().map_err(within("network"))?;
        Ok(exp)
    }

    /// The config of a preset network experiment.
    pub fn lorenz() -> Self {
        let p = lorenz_preset();
        let (drive, response) = match &p.mode {
            SyncMode::Outer { drive, response } => (drive.clone(), response.clone()),
            SyncMode::Inner { .. } => unreachable!("preset is outer"),
        };
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            experiment: ExperimentKind::Network,
            scalar: None,
            network: Some(NetworkBlock {
                preset: Some(Preset::Lorenz),
                a: Some(rows_of(&p.model.a)),
                b: Some(rows_of(&p.model.b)),
                theta1: Some(p.model.theta1),
                theta2: Some(p.model.theta2),
                drive: Some(drive),
                response: Some(response),
                ..NetworkBlock::default()
            }),
            delay: Some(DelayBlock::PerComponentSin { scale: 0.5, amplitude: 0.1 }),
            rate: Some(p.rate),
            integrator: Some(IntegratorBlock {
                h: Some(p.integrator.h),
                horizon: Some(p.integrator.horizon),
                ..Default::default()
            }),
            monitor: None,
            output: None,
        }
    }

    /// The scalar example `p' = p + 2 p(t/2) - c3 sgn(p) - c4 p`, `p(0) = 2`.
    pub fn example1(gains: Option<GainsBlock>, adaptive: Option<AdaptiveBlock>) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            experiment: ExperimentKind::Scalar,
            scalar: Some(ScalarBlock { c1: 1.0, c2: 2.0, initial: vec![2.0], gains, adaptive }),
            network: None,
            delay: Some(DelayBlock::Proportional { q: 0.5 }),
            rate: Some(RateFunction::Power { rho: 0.1 }),
            integrator: Some(IntegratorBlock { h: Some(1e-3), horizon: Some(30.0), ..Default::default() }),
            monitor: None,
            output: None,
        }
    }
}

fn control_spec(c: &ControlBlock) -> Result<Option<NetworkControlSpec>, CliError> {
    let kind = match c.kind {
        ControlKind::None => return Ok(None),
        ControlKind::Pinning => NetworkControlKind::Pinning {
            sigma: c.sigma.ok_or_else(|| field_err("network.control.sigma", "required for pinning control"))?,
        },
        ControlKind::FullNode => NetworkControlKind::FullNode,
    };
    let adaptive = match c.adaptive {
        None => None,
        Some(r) => {
            let rates = AdaptiveRates::new(r.d1, r.d2, r.d3).map_err(within("network.control.adaptive"))?;
            let variant = match kind {
                NetworkControlKind::Pinning { .. } => NetworkAdaptiveVariant::AdaptTheta1Theta3,
                NetworkControlKind::FullNode => NetworkAdaptiveVariant::AdaptTheta3Theta4,
            };
            Some(NetworkAdaptiveSpec { variant, rates })
        }
    };
    let (theta3, theta4) = if adaptive.is_some() { (0.0, 0.0) } else { (c.theta3, c.theta4) };
    let spec = NetworkControlSpec { kind, theta3, theta4, adaptive };
    spec.validate().map_err(within("network.control"))?;
    Ok(Some(spec))
}
