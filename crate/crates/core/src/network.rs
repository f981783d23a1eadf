//! Drive/response networks with delayed coupling
//!
//! `x_i' = f(x_i) + θ1 Σ_j a_ij x_j + θ2 Σ_j b_ij g(x_j(t - π_ij(t)))`
//!
//! and their controlled error systems, in outer mode (a response network
//! tracks a drive network) and inner mode (every node tracks a solution
//! `φ' = f(φ)` of the isolated node).
//!
//! The drive (or reference) is integrated first. The error system is then
//! integrated directly so that the sign feedback acts on `e`, and the
//! response is recovered as `y = x + e` on the shared grid.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::conditions::validate_coupling;
use crate::control::{
    AdaptiveRates, GainMode, NetworkAdaptiveHook, NetworkAdaptiveVariant, NetworkControlKind, NetworkControlSpec,
};
use crate::delay::{DelayProfile, RateFunction};
use crate::error::{invalid, Error, Result};
use crate::history::HistoryTrajectory;
use crate::integrator::{integrate, DelayedSystem, GainHook, IntegratorConfig};

/// Intrinsic node dynamics `f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeDynamics {
    Lorenz {
        sigma: f64,
        rho: f64,
        beta: f64,
    },
    /// `f(x) = M x` with `M` given row-major.
    Linear {
        matrix: Vec<Vec<f64>>,
    },
}

impl NodeDynamics {
    pub fn lorenz() -> Self {
        NodeDynamics::Lorenz { sigma: 10.0, rho: 28.0, beta: 8.0 / 3.0 }
    }

    /// State dimension the dynamics act on.
    pub fn dim(&self) -> usize {
        match self {
            NodeDynamics::Lorenz { .. } => 3,
            NodeDynamics::Linear { matrix } => matrix.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let NodeDynamics::Linear { matrix } = self {
            let n = matrix.len();
            if n == 0 || matrix.iter().any(|r| r.len() != n) {
                return Err(invalid("matrix", "linear node dynamics need a nonempty square matrix"));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        match self {
            NodeDynamics::Lorenz { sigma, rho, beta } => {
                out[0] = sigma * (x[1] - x[0]);
                out[1] = rho * x[0] - x[1] - x[0] * x[2];
                out[2] = x[0] * x[1] - beta * x[2];
            }
            NodeDynamics::Linear { matrix } => {
                for (o, row) in out.iter_mut().zip(matrix) {
                    *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
                }
            }
        }
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        match self {
            NodeDynamics::Lorenz { sigma, rho, beta } => {
                DMatrix::from_row_slice(3, 3, &[-sigma, *sigma, 0.0, rho - x[2], -1.0, -x[0], x[1], x[0], -beta])
            }
            NodeDynamics::Linear { matrix } => {
                let n = matrix.len();
                DMatrix::from_fn(n, n, |i, j| matrix[i][j])
            }
        }
    }
}

/// Componentwise delayed-coupling nonlinearity `g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingFn {
    /// `sin(v) + slope v`
    SinPlusLinear { slope: f64 },
    /// `gain v`
    Linear { gain: f64 },
}

impl CouplingFn {
    pub fn eval(&self, v: f64) -> f64 {
        match self {
            CouplingFn::SinPlusLinear { slope } => v.sin() + slope * v,
            CouplingFn::Linear { gain } => gain * v,
        }
    }

    /// `sup |g'|`.
    pub fn lipschitz(&self) -> f64 {
        match self {
            CouplingFn::SinPlusLinear { slope } => 1.0 + slope.abs(),
            CouplingFn::Linear { gain } => gain.abs(),
        }
    }
}

/// Largest spectral norm of the Jacobian of `f` over a grid of
/// `per_axis^n` points spanning the box `[lo, hi]`.
pub fn estimate_lipschitz(f: &NodeDynamics, lo: &[f64], hi: &[f64], per_axis: usize) -> Result<f64> {
    let n = f.dim();
    if lo.len() != n || hi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: lo.len().min(hi.len()) });
    }
    if per_axis < 2 {
        return Err(invalid("per_axis", "need at least 2 samples per axis"));
    }
    let total = per_axis.pow(n as u32);
    let mut x = vec![0.0; n];
    let mut best: f64 = 0.0;
    for idx in 0..total {
        let mut r = idx;
        for d in 0..n {
            let k = r % per_axis;
            r /= per_axis;
            x[d] = lo[d] + (hi[d] - lo[d]) * k as f64 / (per_axis - 1) as f64;
        }
        let sv = f.jacobian(&x).singular_values();
        best = best.max(sv.max());
    }
    Ok(best)
}

/// A network of `nodes` identical `dim`-dimensional nodes.
#[derive(Clone, Debug)]
pub struct NetworkModel {
    pub nodes: usize,
    pub dim: usize,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub theta1: f64,
    pub theta2: f64,
    pub f: NodeDynamics,
    pub g: CouplingFn,
    pub lipschitz_f: f64,
    /// Pairwise delays; the pair `(i, j)` is component `i * nodes + j`.
    pub delays: DelayProfile,
}

impl NetworkModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        theta1: f64,
        theta2: f64,
        f: NodeDynamics,
        g: CouplingFn,
        lipschitz_f: f64,
        delays: DelayProfile,
    ) -> Result<Self> {
        let m = Self { nodes: a.nrows(), dim: f.dim(), a, b, theta1, theta2, f, g, lipschitz_f, delays };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        validate_coupling(&self.a)?;
        self.f.validate()?;
        if self.b.nrows() != self.nodes || self.b.ncols() != self.nodes {
            return Err(Error::DimensionMismatch { expected: self.nodes, got: self.b.nrows() });
        }
        if self.delays.components() != self.nodes * self.nodes {
            return Err(Error::DimensionMismatch { expected: self.nodes * self.nodes, got: self.delays.components() });
        }
        if !(self.lipschitz_f >= 0.0) {
            return Err(invalid("lipschitz_f", "must be >= 0"));
        }
        Ok(())
    }

    pub fn lipschitz_g(&self) -> f64 {
        self.g.lipschitz()
    }

    fn state_dim(&self) -> usize {
        self.nodes * self.dim
    }

    /// `θ1 Σ_j a_ij v_j` for every node, added into `out`.
    fn add_linear_coupling(&self, theta1: f64, v: &[f64], out: &mut [f64]) {
        let n = self.dim;
        for i in 0..self.nodes {
            for j in 0..self.nodes {
                let a = theta1 * self.a[(i, j)];
                if a != 0.0 {
                    for k in 0..n {
                        out[i * n + k] += a * v[j * n + k];
                    }
                }
            }
        }
    }

    /// Delayed argument time of pair `(i, j)` on the delay clock `td`.
    fn lag_time(&self, i: usize, j: usize, td: f64) -> f64 {
        td - self.delays.eval_unchecked(i * self.nodes + j, td)
    }
}

/// Reference dynamics of a synchronization run.
#[derive(Clone, Debug, PartialEq)]
pub enum SyncMode {
    /// Drive initial states and response initial states, each `N n` long.
    Outer { drive: Vec<f64>, response: Vec<f64> },
    /// Reference `φ(0)` (length `n`) and response initial states.
    Inner { reference: Vec<f64>, response: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct SyncExperiment {
    pub model: NetworkModel,
    pub mode: SyncMode,
    /// `None` runs the uncontrolled baseline.
    pub control: Option<NetworkControlSpec>,
    pub integrator: IntegratorConfig,
    /// Rate function of the adaptive rules.
    pub rate: RateFunction,
}

/// Residuals of `Σ b_ij g(φ(t - π_ij(t)))` in inner mode, summed over `j`
/// per row and over `i` per column. Largest Euclidean norm over the run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerResidual {
    pub row_max: f64,
    pub column_max: f64,
}

#[derive(Clone, Debug)]
pub struct SyncResult {
    /// Drive network (outer) or the isolated reference `φ` (inner).
    pub reference: HistoryTrajectory,
    pub response: HistoryTrajectory,
    /// Error states `e = y - x` (or `y_i - φ`) with the adapted gains, if any.
    pub error: HistoryTrajectory,
    /// Switching branch at each step of an adaptive run.
    pub modes: Vec<GainMode>,
    pub inner_residual: Option<InnerResidual>,
}

impl SyncResult {
    /// Series of a named gain (`theta1`, `theta3`, `theta4`).
    pub fn gain(&self, name: &str) -> Option<Vec<f64>> {
        self.error.gain_column(name).map(|c| self.error.gain_series(c))
    }
}

struct DriveSystem<'a> {
    model: &'a NetworkModel,
}

impl DelayedSystem for DriveSystem<'_> {
    fn dim(&self) -> usize {
        self.model.state_dim()
    }

    fn drift(&self, _t: f64, td: f64, x: &[f64], hist: &HistoryTrajectory, _g: &[f64], out: &mut [f64]) -> Result<()> {
        let m = self.model;
        let n = m.dim;
        for i in 0..m.nodes {
            m.f.eval(&x[i * n..(i + 1) * n], &mut out[i * n..(i + 1) * n]);
        }
        m.add_linear_coupling(m.theta1, x, out);
        for i in 0..m.nodes {
            for j in 0..m.nodes {
                let b = m.theta2 * m.b[(i, j)];
                if b == 0.0 {
                    continue;
                }
                let s = m.lag_time(i, j, td);
                for k in 0..n {
                    out[i * n + k] += b * m.g.eval(hist.query_component(s, j * n + k)?);
                }
            }
        }
        Ok(())
    }
}

struct ReferenceSystem<'a> {
    f: &'a NodeDynamics,
}

impl DelayedSystem for ReferenceSystem<'_> {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn drift(&self, _t: f64, _td: f64, x: &[f64], _h: &HistoryTrajectory, _g: &[f64], out: &mut [f64]) -> Result<()> {
        self.f.eval(x, out);
        Ok(())
    }
}

/// Resolved gains `(θ1, θ3, θ4, σ)` of the error system.
fn resolve_gains(model: &NetworkModel, control: Option<&NetworkControlSpec>, gains: &[f64]) -> (f64, f64, f64, f64) {
    let Some(spec) = control else {
        return (model.theta1, 0.0, 0.0, 0.0);
    };
    let sigma = match spec.kind {
        NetworkControlKind::Pinning { sigma } => sigma,
        NetworkControlKind::FullNode => 0.0,
    };
    let theta4 = match spec.kind {
        NetworkControlKind::Pinning { .. } => 0.0,
        NetworkControlKind::FullNode => spec.theta4,
    };
    match spec.adaptive.map(|a| a.variant) {
        None => (model.theta1, spec.theta3, theta4, sigma),
        Some(NetworkAdaptiveVariant::AdaptTheta1Theta3) => (gains[0], gains[1], theta4, sigma),
        Some(NetworkAdaptiveVariant::AdaptTheta3Theta4) => (model.theta1, gains[0], gains[1], sigma),
    }
}

/// Error dynamics against a stored reference. `inner` selects whether the
/// reference is a drive network (`N n` states) or a single node `φ`.
struct ErrorSystem<'a> {
    model: &'a NetworkModel,
    control: Option<&'a NetworkControlSpec>,
    reference: &'a HistoryTrajectory,
    inner: bool,
}

impl ErrorSystem<'_> {
    fn reference_component(&self, s: f64, node: usize, k: usize) -> Result<f64> {
        let c = if self.inner { k } else { node * self.model.dim + k };
        self.reference.query_component(s, c)
    }
}

impl DelayedSystem for ErrorSystem<'_> {
    fn dim(&self) -> usize {
        self.model.state_dim()
    }

    fn drift(
        &self,
        t: f64,
        td: f64,
        e: &[f64],
        hist: &HistoryTrajectory,
        gains: &[f64],
        out: &mut [f64],
    ) -> Result<()> {
        let m = self.model;
        let n = m.dim;
        let (theta1, _, theta4, sigma) = resolve_gains(m, self.control, gains);
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut fy = vec![0.0; n];
        for i in 0..m.nodes {
            for k in 0..n {
                x[k] = self.reference_component(t, i, k)?;
                y[k] = x[k] + e[i * n + k];
            }
            m.f.eval(&y, &mut fy);
            m.f.eval(&x, &mut out[i * n..(i + 1) * n]);
            for k in 0..n {
                out[i * n + k] = fy[k] - out[i * n + k] - theta4 * e[i * n + k];
            }
        }
        m.add_linear_coupling(theta1, e, out);
        if sigma > 0.0 {
            for k in 0..n {
                out[k] -= theta1 * sigma * e[k];
            }
        }
        for i in 0..m.nodes {
            for j in 0..m.nodes {
                let b = m.theta2 * m.b[(i, j)];
                if b == 0.0 {
                    continue;
                }
                let s = m.lag_time(i, j, td);
                for k in 0..n {
                    let xs = self.reference_component(s, j, k)?;
                    let es = hist.query_component(s, j * n + k)?;
                    // inner mode keeps Σ b_ij g(φ(s)) in the error equation
                    let base = if self.inner { 0.0 } else { m.g.eval(xs) };
                    out[i * n + k] += b * (m.g.eval(xs + es) - base);
                }
            }
        }
        Ok(())
    }

    fn sign_gain(&self, _component: usize, gains: &[f64]) -> f64 {
        resolve_gains(self.model, self.control, gains).1
    }
}

impl SyncExperiment {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.integrator.validate()?;
        self.rate.validate()?;
        if let Some(c) = &self.control {
            c.validate()?;
        }
        let full = self.model.state_dim();
        let (reference_len, expected_ref, response_len) = match &self.mode {
            SyncMode::Outer { drive, response } => (drive.len(), full, response.len()),
            SyncMode::Inner { reference, response } => (reference.len(), self.model.dim, response.len()),
        };
        if reference_len != expected_ref {
            return Err(Error::DimensionMismatch { expected: expected_ref, got: reference_len });
        }
        if response_len != full {
            return Err(Error::DimensionMismatch { expected: full, got: response_len });
        }
        Ok(())
    }

    fn integrate_reference(&self) -> Result<HistoryTrajectory> {
        match &self.mode {
            SyncMode::Outer { drive, .. } => {
                integrate(&DriveSystem { model: &self.model }, drive, &self.integrator, None)
            }
            SyncMode::Inner { reference, .. } => {
                integrate(&ReferenceSystem { f: &self.model.f }, reference, &self.integrator, None)
            }
        }
    }

    /// Integrate the reference, then the controlled error system.
    pub fn simulate(&self) -> Result<SyncResult> {
        self.validate()?;
        let reference = self.integrate_reference()?;
        let inner = matches!(self.mode, SyncMode::Inner { .. });
        let (ref0, response0) = match &self.mode {
            SyncMode::Outer { drive, response } => (drive.clone(), response),
            SyncMode::Inner { reference, response } => (reference.repeat(self.model.nodes), response),
        };
        let e0: Vec<f64> = response0.iter().zip(&ref0).map(|(y, x)| y - x).collect();
        let system = ErrorSystem { model: &self.model, control: self.control.as_ref(), reference: &reference, inner };

        let adaptive = self.control.as_ref().and_then(|c| c.adaptive);
        let (error, modes) = match adaptive {
            Some(spec) => {
                let mut hook =
                    NetworkAdaptiveHook::new(spec, self.rate, self.model.delays.clone(), self.integrator.zero_tol);
                let tr = integrate(&system, &e0, &self.integrator, Some(&mut hook as &mut dyn GainHook))?;
                (tr, hook.modes().to_vec())
            }
            None => (integrate(&system, &e0, &self.integrator, None)?, Vec::new()),
        };

        let mut response = HistoryTrajectory::new(error.t0(), error.step(), response0);
        let n = self.model.dim;
        let mut y = vec![0.0; error.dim()];
        for k in 1..error.len() {
            let r = reference.state(k);
            for (c, v) in y.iter_mut().enumerate() {
                let base = if inner { r[c % n] } else { r[c] };
                *v = base + error.state(k)[c];
            }
            response.push(&y, &[]);
        }
        let inner_residual = if inner { Some(inner_residual(&self.model, &reference)?) } else { None };
        Ok(SyncResult { reference, response, error, modes, inner_residual })
    }

    /// Outer mode only: integrate the response network itself under static
    /// control computed from `y - x`, without routing through the error
    /// system. Returns `(drive, response)`.
    pub fn simulate_response_direct(&self) -> Result<(HistoryTrajectory, HistoryTrajectory)> {
        self.validate()?;
        let SyncMode::Outer { response, .. } = &self.mode else {
            return Err(invalid("mode", "the direct route needs outer synchronization"));
        };
        if self.control.as_ref().is_some_and(|c| c.adaptive.is_some()) {
            return Err(invalid("control", "the direct route supports static control only"));
        }
        let drive = self.integrate_reference()?;
        let sys = ResponseSystem { model: &self.model, control: self.control.as_ref(), drive: &drive };
        let resp = integrate(&sys, response, &self.integrator, None)?;
        Ok((drive, resp))
    }
}

/// `simulate_sync` as a free function.
pub fn simulate_sync(exp: &SyncExperiment) -> Result<SyncResult> {
    exp.simulate()
}

struct ResponseSystem<'a> {
    model: &'a NetworkModel,
    control: Option<&'a NetworkControlSpec>,
    drive: &'a HistoryTrajectory,
}

impl DelayedSystem for ResponseSystem<'_> {
    fn dim(&self) -> usize {
        self.model.state_dim()
    }

    fn drift(
        &self,
        t: f64,
        td: f64,
        y: &[f64],
        hist: &HistoryTrajectory,
        gains: &[f64],
        out: &mut [f64],
    ) -> Result<()> {
        DriveSystem { model: self.model }.drift(t, td, y, hist, gains, out)?;
        let Some(spec) = self.control else {
            return Ok(());
        };
        let mut x = vec![0.0; y.len()];
        self.drive.query(t, &mut x)?;
        let e: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let u = crate::control::network_control(&e, self.model.dim, spec, self.model.theta1);
        for (o, v) in out.iter_mut().zip(u) {
            *o += v;
        }
        Ok(())
    }
}

fn inner_residual(model: &NetworkModel, reference: &HistoryTrajectory) -> Result<InnerResidual> {
    let (nn, n) = (model.nodes, model.dim);
    let mut row_max: f64 = 0.0;
    let mut column_max: f64 = 0.0;
    let mut rows = vec![0.0; nn * n];
    let mut cols = vec![0.0; nn * n];
    for step in 0..reference.len() {
        let t = reference.time(step);
        rows.fill(0.0);
        cols.fill(0.0);
        for i in 0..nn {
            for j in 0..nn {
                let b = model.b[(i, j)];
                if b == 0.0 {
                    continue;
                }
                let s = model.lag_time(i, j, t);
                for k in 0..n {
                    let v = b * model.g.eval(reference.query_component(s, k)?);
                    rows[i * n + k] += v;
                    cols[j * n + k] += v;
                }
            }
        }
        let block_max =
            |v: &[f64]| v.chunks(n).map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
        row_max = row_max.max(block_max(&rows));
        column_max = column_max.max(block_max(&cols));
    }
    Ok(InnerResidual { row_max, column_max })
}

/// `(E1, E2, ||E||_2)` at time `t`: spread of the drive nodes around node 1,
/// spread of the response nodes around node 1, and the drive/response
/// distance.
pub fn error_indices(
    drive: &HistoryTrajectory,
    response: &HistoryTrajectory,
    nodes: usize,
    t: f64,
) -> Result<(f64, f64, f64)> {
    if drive.dim() != response.dim() {
        return Err(Error::DimensionMismatch { expected: drive.dim(), got: response.dim() });
    }
    if nodes == 0 || !drive.dim().is_multiple_of(nodes) {
        return Err(invalid("nodes", format!("{} states do not split into {nodes} nodes", drive.dim())));
    }
    for tr in [drive, response] {
        if t < tr.t0() || t > tr.current_time() + 1e-9 * tr.step() {
            return Err(Error::HistoryOutOfRange { query: t, start: tr.t0(), end: tr.current_time() });
        }
    }
    let mut x = vec![0.0; drive.dim()];
    let mut y = vec![0.0; drive.dim()];
    drive.query(t, &mut x)?;
    response.query(t, &mut y)?;
    Ok(indices_of(&x, &y, nodes))
}

/// The three indices for stacked states `x`, `y` of `nodes` nodes.
pub fn indices_of(x: &[f64], y: &[f64], nodes: usize) -> (f64, f64, f64) {
    let n = x.len() / nodes;
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
    let spread = |s: &[f64]| (1..nodes).map(|i| dist(&s[i * n..(i + 1) * n], &s[..n])).sum::<f64>();
    (spread(x), spread(y), dist(x, y))
}

/// The three-node Lorenz network with fixed matrices, delays and
/// initial states; no controller.
pub fn lorenz_preset() -> SyncExperiment {
    let a = DMatrix::from_row_slice(3, 3, &[-5.0, 2.0, 3.0, 1.0, -4.0, 3.0, 1.0, 2.0, -3.0]);
    let b = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0]);
    let f = NodeDynamics::lorenz();
    let lf = estimate_lipschitz(&f, &LORENZ_BOX.0, &LORENZ_BOX.1, 11).expect("box matches the node dimension");
    let delays = DelayProfile::per_component_sin(0.5, 0.1, 3).expect("valid preset delays");
    let model = NetworkModel::new(a, b, 0.1, 1.0, f, CouplingFn::SinPlusLinear { slope: 2.0 }, lf, delays)
        .expect("valid preset model");
    SyncExperiment {
        model,
        mode: SyncMode::Outer {
            drive: vec![-1.5771, 0.5080, 0.2820, 0.0335, -1.3337, 1.1275, 0.3502, -0.2991, 0.0229],
            response: vec![-0.8479, -1.1201, 2.5260, 1.6555, 0.3075, -1.2571, -0.8655, -0.1765, 0.7914],
        },
        control: None,
        integrator: IntegratorConfig::new(5e-4, 20.0),
        rate: RateFunction::Power { rho: 0.1 },
    }
}

/// Box enclosing the Lorenz attractor, used for the `L_f` estimate.
pub const LORENZ_BOX: ([f64; 3], [f64; 3]) = ([-25.0, -35.0, 0.0], [25.0, 35.0, 55.0]);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Example2Variant {
    NoControl,
    /// Full-node control with `θ3' = d_theta3` in the unit ball and
    /// `θ4' = d_theta4 μ S` above it, `d_theta4 sqrt(S)` inside.
    AdaptiveFull {
        d_theta3: f64,
        d_theta4: f64,
    },
}

impl Default for Example2Variant {
    fn default() -> Self {
        Example2Variant::AdaptiveFull { d_theta3: 0.02, d_theta4: 0.05 }
    }
}

/// The Lorenz preset under `variant`.
pub fn example2(variant: Example2Variant) -> Result<SyncExperiment> {
    let mut exp = lorenz_preset();
    if let Example2Variant::AdaptiveFull { d_theta3, d_theta4 } = variant {
        exp.control = Some(NetworkControlSpec::adaptive_full_node(AdaptiveRates::new(d_theta4, d_theta4, d_theta3)?));
    }
    Ok(exp)
}
