//! Subcommand implementations. Each returns the text it prints; files go to
//! the output directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use delayfts_core::conditions::{
    check_network_theorem, check_scalar_theorem, left_eigenvector, settling_bound, CheckOptions,
    NetworkConditionParams, NetworkVariant,
};
use delayfts_core::control::NetworkControlKind;
use delayfts_core::delay::DelayKind;
use delayfts_core::monitors::{
    contact_point_decrease, detect_phases, failures, trace_csv, trace_functional, FunctionalParams,
};
use delayfts_core::network::{indices_of, InnerResidual, SyncMode};
use delayfts_core::{
    asymptotics, Asymptotics, ConditionReport, DelayProfile, FunctionalId, HistoryTrajectory, Norm, PhaseReport,
    RateFunction, SyncResult, WindowFunctional,
};

use crate::config::{
    AdaptiveBlock, ControlBlock, ControlKind, ExperimentConfig, ExperimentKind, GainsBlock, NetworkPlan, Plan,
    RatesBlock, ScalarPlan,
};
use crate::CliError;

/// Settings shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct OutputOptions {
    /// Overrides the config's `output.dir`.
    pub dir: Option<PathBuf>,
    /// Overrides the config's `output.stride`.
    pub stride: Option<usize>,
}

impl OutputOptions {
    fn dir_for(&self, plan: &Plan) -> PathBuf {
        self.dir
            .clone()
            .or_else(|| plan.output().dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    fn stride_for(&self, plan: &Plan) -> usize {
        self.stride.unwrap_or(plan.output().stride).max(1)
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(io(&path))?;
    Ok(path)
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

fn fmt_time(t: f64) -> String {
    if t.is_finite() {
        format!("{t:.4}")
    } else {
        "inf".into()
    }
}

/// Everything `simulate` learns about a run.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub experiment: ExperimentKind,
    /// Conditions checked on the configured gains; empty for adaptive scalar runs.
    pub conditions: Vec<ConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_note: Option<String>,
    pub phases: PhaseReport,
    pub t2_bound: Option<f64>,
    pub final_norm: f64,
    pub final_gains: BTreeMap<String, f64>,
    pub steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_residual: Option<InnerResidual>,
}

impl Report {
    /// The condition the phase bound refers to.
    pub fn primary(&self) -> Option<&ConditionReport> {
        self.conditions.first()
    }

    pub fn summary_line(&self) -> String {
        let p = &self.phases;
        format!(
            "T1={}, T_settle={}, T2_bound={}, violations={}",
            fmt_time(p.t1),
            fmt_time(p.t_settle),
            self.t2_bound.map_or("n/a".to_string(), fmt_time),
            p.envelope_violations
        )
    }
}

/// A finished run together with the plan that produced it.
pub enum Run {
    Scalar { plan: ScalarPlan, traj: HistoryTrajectory, report: Report },
    Network { plan: NetworkPlan, result: Box<SyncResult>, report: Report },
}

impl Run {
    pub fn report(&self) -> &Report {
        match self {
            Run::Scalar { report, .. } | Run::Network { report, .. } => report,
        }
    }

    /// Trajectory the functionals are evaluated on: the state (scalar) or
    /// the synchronization error (network).
    pub fn trajectory(&self) -> &HistoryTrajectory {
        match self {
            Run::Scalar { traj, .. } => traj,
            Run::Network { result, .. } => &result.error,
        }
    }
}

fn check_options(plan: &Plan) -> CheckOptions {
    let m = plan.monitor();
    CheckOptions { eps1: m.eps1, synchronous_delays: m.synchronous_delays }
}

/// `(β, η)` for the plan, delay-free for a zero constant delay. The inner
/// `Err` carries a note when no closed form exists.
fn asym_for(rate: &RateFunction, profile: &DelayProfile) -> Result<Result<Asymptotics, String>, CliError> {
    if let DelayKind::Constant { pi } = profile.kind() {
        if *pi == 0.0 {
            rate.validate()?;
            return Ok(Ok(Asymptotics::delay_free()));
        }
    }
    match asymptotics(rate, profile) {
        Ok(a) => Ok(Ok(a)),
        Err(e @ delayfts_core::Error::NoClosedForm { .. }) => Ok(Err(e.to_string())),
        Err(e) => Err(e.into()),
    }
}

/// Scalar conditions, the configured norm first.
fn scalar_conditions(
    plan: &ScalarPlan,
    opts: CheckOptions,
) -> Result<(Vec<ConditionReport>, Option<String>), CliError> {
    let Some(gains) = plan.gains else {
        return Ok((Vec::new(), Some("adaptive gains: the conditions apply to the frozen gains".into())));
    };
    let asym = match asym_for(&plan.rate, &plan.delay)? {
        Ok(a) => a,
        Err(note) => return Ok((Vec::new(), Some(note))),
    };
    let m = plan.experiment.initial.len();
    let mut norms = vec![plan.norm];
    norms.extend([Norm::Two, Norm::One, Norm::Inf].into_iter().filter(|n| *n != plan.norm));
    let reports =
        norms.into_iter().map(|n| check_scalar_theorem(&gains, m, asym, n, opts)).collect::<Result<Vec<_>, _>>()?;
    Ok((reports, None))
}

fn network_xi(plan: &NetworkPlan) -> Result<Vec<f64>, CliError> {
    Ok(left_eigenvector(&plan.experiment.model.a)?.iter().copied().collect())
}

fn network_condition(
    plan: &NetworkPlan,
    opts: CheckOptions,
) -> Result<(Vec<ConditionReport>, Option<String>), CliError> {
    let exp = &plan.experiment;
    let model = &exp.model;
    let asym = match asym_for(&exp.rate, &model.delays)? {
        Ok(a) => a,
        Err(note) => return Ok((Vec::new(), Some(note))),
    };
    let (variant, sigma, theta3, theta4) = match &exp.control {
        Some(c) => match c.kind {
            NetworkControlKind::Pinning { sigma } => (NetworkVariant::Pinning, sigma, c.theta3, c.theta4),
            NetworkControlKind::FullNode => (NetworkVariant::FullNode, 0.0, c.theta3, c.theta4),
        },
        None => (NetworkVariant::FullNode, 0.0, 0.0, 0.0),
    };
    let note = match &exp.control {
        None => Some("no control: evaluated with theta3 = theta4 = 0".to_string()),
        Some(c) if c.adaptive.is_some() => Some("adaptive control: evaluated at the initial gains".to_string()),
        Some(_) => None,
    };
    let params = NetworkConditionParams {
        lipschitz_f: model.lipschitz_f,
        lipschitz_g: model.lipschitz_g(),
        theta1: model.theta1,
        theta2: model.theta2,
        theta3,
        theta4,
        sigma,
        n: model.dim,
        a: model.a.clone(),
        b: model.b.clone(),
        xi: None,
        asym,
    };
    Ok((vec![check_network_theorem(&params, variant, opts)?], note))
}

/// Conditions of a plan without simulating it.
pub fn conditions(plan: &Plan) -> Result<(Vec<ConditionReport>, Option<String>), CliError> {
    let opts = check_options(plan);
    match plan {
        Plan::Scalar(p) => scalar_conditions(p, opts),
        Plan::Network(p) => network_condition(p, opts),
    }
}

fn eps2_for(plan: &Plan, primary: Option<&ConditionReport>) -> f64 {
    let m = plan.monitor();
    m.eps2.unwrap_or_else(|| primary.map_or(0.0, |r| (m.kappa * r.epsilon2_max).max(0.0)))
}

fn final_gains(traj: &HistoryTrajectory) -> BTreeMap<String, f64> {
    let last = traj.len() - 1;
    traj.gain_names().iter().cloned().zip(traj.gains(last).iter().copied()).collect()
}

/// Conditions, phases and end state of a trajectory of `plan`: the state
/// for scalar plans, the synchronization error for network plans.
pub fn analyze(plan: &Plan, traj: &HistoryTrajectory) -> Result<Report, CliError> {
    let (conds, note) = conditions(plan)?;
    let eps2 = eps2_for(plan, conds.first());
    let kappa = plan.monitor().kappa;
    let (experiment, profile, functional, norm, dim) = match plan {
        Plan::Scalar(p) => {
            (ExperimentKind::Scalar, &p.delay, p.norm.switching_functional(), p.norm, p.experiment.initial.len())
        }
        Plan::Network(p) => {
            let m = &p.experiment.model;
            (
                ExperimentKind::Network,
                &m.delays,
                WindowFunctional::WeightedSq(network_xi(p)?),
                Norm::Two,
                m.nodes * m.dim,
            )
        }
    };
    if traj.dim() != dim {
        return Err(delayfts_core::Error::DimensionMismatch { expected: dim, got: traj.dim() }.into());
    }
    let phases = detect_phases(traj, profile, &functional, eps2, plan.integrator().zero_tol)?;
    Ok(Report {
        experiment,
        t2_bound: conds.first().and_then(|r| settling_bound(r, phases.t1, kappa).ok()),
        final_norm: norm.norm(traj.last_state()),
        final_gains: final_gains(traj),
        steps: traj.len() - 1,
        conditions: conds,
        condition_note: note,
        phases,
        inner_residual: None,
    })
}

/// Integrate a plan and analyze the result.
pub fn run(plan: Plan) -> Result<Run, CliError> {
    match plan {
        Plan::Scalar(ref p) => {
            let traj = p.experiment.run()?;
            let report = analyze(&plan, &traj)?;
            let Plan::Scalar(p) = plan else { unreachable!() };
            Ok(Run::Scalar { plan: p, traj, report })
        }
        Plan::Network(ref p) => {
            let result = p.experiment.simulate()?;
            let mut report = analyze(&plan, &result.error)?;
            report.inner_residual = result.inner_residual;
            let Plan::Network(p) = plan else { unreachable!() };
            Ok(Run::Network { plan: p, result: Box::new(result), report })
        }
    }
}

/// `t,E1,E2,E` for every `stride`-th grid point of a network run.
pub fn indices_csv(plan: &NetworkPlan, result: &SyncResult, stride: usize) -> String {
    let nodes = plan.experiment.model.nodes;
    let inner = matches!(plan.experiment.mode, SyncMode::Inner { .. });
    let mut out = String::from("t,E1,E2,E\n");
    let last = result.error.len() - 1;
    for k in (0..=last).filter(|k| k % stride == 0 || *k == last) {
        let r = result.reference.state(k);
        let x = if inner { r.repeat(nodes) } else { r.to_vec() };
        let (e1, e2, e) = indices_of(&x, result.response.state(k), nodes);
        let _ = writeln!(out, "{},{e1:e},{e2:e},{e:e}", result.error.time(k));
    }
    out
}

/// `t,E,<gains...>` for every `stride`-th grid point of a network run.
pub fn gains_csv(result: &SyncResult, stride: usize) -> String {
    let tr = &result.error;
    let mut out = String::from("t,E");
    for name in tr.gain_names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let last = tr.len() - 1;
    for k in (0..=last).filter(|k| k % stride == 0 || *k == last) {
        let _ = write!(out, "{},{:e}", tr.time(k), Norm::Two.norm(tr.state(k)));
        for g in tr.gains(k) {
            let _ = write!(out, ",{g:e}");
        }
        out.push('\n');
    }
    out
}

fn summarize_run(run: &Run, written: &[PathBuf]) -> String {
    let r = run.report();
    let mut out = String::new();
    let _ = writeln!(out, "{}", r.summary_line());
    let _ = writeln!(out, "final norm = {:.4e} after {} steps", r.final_norm, r.steps);
    if !r.final_gains.is_empty() {
        let gains: Vec<String> = r.final_gains.iter().map(|(k, v)| format!("{k} = {v:.4}")).collect();
        let _ = writeln!(out, "final gains: {}", gains.join(", "));
    }
    if let Some(c) = r.primary() {
        let _ = writeln!(out, "{}: {}", c.theorem.label(), if c.feasible { "feasible" } else { "infeasible" });
    }
    for p in written {
        let _ = writeln!(out, "wrote {}", p.display());
    }
    out
}

/// `simulate`: trajectory CSV, report JSON and the config used.
pub fn simulate(cfg: &ExperimentConfig, out: &OutputOptions) -> Result<String, CliError> {
    let plan = cfg.plan()?;
    let dir = out.dir_for(&plan);
    let stride = out.stride_for(&plan);
    let run = run(plan)?;
    let mut written = vec![write_file(&dir, "trajectory.csv", &run.trajectory().to_csv(stride))?];
    if let Run::Network { plan, result, .. } = &run {
        written.push(write_file(&dir, "indices.csv", &indices_csv(plan, result, stride))?);
        if result.error.gain_dim() > 0 {
            written.push(write_file(&dir, "gains.csv", &gains_csv(result, stride))?);
        }
    }
    written.push(write_file(&dir, "report.json", &to_json(run.report()))?);
    written.push(write_file(&dir, "config.json", &(cfg.to_json() + "\n"))?);
    Ok(summarize_run(&run, &written))
}

/// `check`: the condition table, then one verdict line per condition.
/// With `require_feasible`, an infeasible primary condition is an error.
pub fn check(cfg: &ExperimentConfig, require_feasible: bool) -> Result<String, CliError> {
    let plan = cfg.plan()?;
    let (conds, note) = conditions(&plan)?;
    let kappa = plan.monitor().kappa;
    let mut out = String::new();
    if !conds.is_empty() {
        let _ = writeln!(
            out,
            "{:<18} {:>12} {:>10} {:>9} {:>13} {:>10}",
            "theorem", "lhs", "eps1*", "feasible", "epsilon2_max", "T2 - T1"
        );
    }
    for r in &conds {
        let eps1 = r.eps1_optimal.map_or("-".to_string(), |e| format!("{e:.4}"));
        let gap = if r.feasible { format!("{:.4}", 1.0 / (kappa * r.epsilon2_max)) } else { "-".to_string() };
        let _ = writeln!(
            out,
            "{:<18} {:>12.4} {eps1:>10} {:>9} {:>13.4} {gap:>10}",
            r.theorem.label(),
            r.lhs,
            r.feasible,
            r.epsilon2_max
        );
    }
    for r in &conds {
        let verdict = if r.feasible { "feasible" } else { "infeasible" };
        match (&plan, r.linear_threshold) {
            (Plan::Scalar(_), Some(t)) => {
                let _ = writeln!(out, "{}: {verdict}, threshold c4 > {t:.3}", r.theorem.label());
            }
            _ => {
                let _ = writeln!(out, "{}: {verdict}, margin {:.4}", r.theorem.label(), r.margin);
            }
        }
    }
    if let Some(r) = conds.first() {
        let (gain, current) = match &plan {
            Plan::Scalar(p) => ("c3", p.gains.map_or(0.0, |g| g.c3)),
            Plan::Network(p) => ("theta3", p.experiment.control.map_or(0.0, |c| c.theta3)),
        };
        let verdict = if r.sign_condition_holds() { "holds" } else { "fails" };
        let _ = writeln!(out, "sign condition: {gain} > {} required ({gain} = {current}, {verdict})", r.sign_threshold);
    }
    if let Some(n) = &note {
        let _ = writeln!(out, "note: {n}");
    }
    if require_feasible {
        match conds.first() {
            Some(r) if r.feasible => {}
            Some(r) => {
                return Err(CliError::Infeasible(format!(
                    "{} (lhs = {:.4}, sign margin = {:.4})",
                    r.theorem.label(),
                    r.lhs,
                    r.epsilon2_max
                )))
            }
            None => return Err(CliError::Infeasible(note.unwrap_or_else(|| "no condition applies".into()))),
        }
    }
    Ok(out)
}

fn resolve_functional(plan: &Plan, name: Option<&str>) -> Result<FunctionalId, CliError> {
    let name = name.or(plan.monitor().functional.as_deref());
    match name {
        Some(n) => FunctionalId::parse(n).ok_or_else(|| CliError::Config {
            field: "monitor.functional".into(),
            message: format!("unknown functional `{n}`; expected V1..V8 or Vbar1..Vbar8"),
        }),
        None => Ok(match plan {
            Plan::Network(_) => FunctionalId::Vbar1,
            Plan::Scalar(p) => match p.norm {
                Norm::Two => FunctionalId::V1,
                Norm::One => FunctionalId::V5,
                Norm::Inf => FunctionalId::V7,
            },
        }),
    }
}

/// Result of the `monitor` subcommand.
#[derive(Clone, Debug, Serialize)]
pub struct MonitorSummary {
    pub functional: String,
    pub start: f64,
    pub contacts: usize,
    pub contacts_off_origin: usize,
    pub failing: usize,
    pub phases: PhaseReport,
    pub t2_bound: Option<f64>,
}

/// `monitor`: trace one functional, check its contact points and write
/// `trace.csv` with columns `t,V,W,contact`. With `trajectory`, the CSV
/// written by `simulate` is analyzed instead of integrating again.
pub fn monitor(
    cfg: &ExperimentConfig,
    trajectory: Option<&Path>,
    functional: Option<&str>,
    out: &OutputOptions,
) -> Result<String, CliError> {
    let plan = cfg.plan()?;
    let id = resolve_functional(&plan, functional)?;
    let dir = out.dir_for(&plan);
    let traj = match trajectory {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
            HistoryTrajectory::from_csv(&text)?
        }
        None => match run(plan.clone())? {
            Run::Scalar { traj, .. } => traj,
            Run::Network { result, .. } => result.error,
        },
    };
    let report = analyze(&plan, &traj)?;
    let (rate, profile, xi) = match &plan {
        Plan::Scalar(p) => (p.rate, &p.delay, None),
        Plan::Network(p) => (p.experiment.rate, &p.experiment.model.delays, Some(network_xi(p)?)),
    };
    let eps2 = (report.phases.eps2 > 0.0).then_some(report.phases.eps2);
    let params = FunctionalParams { xi, eps2, penalties: Vec::new() };
    let start = match plan.monitor().start {
        Some(s) => s,
        None if id.needs_eps2() => {
            if !report.phases.reached_unit_window() {
                return Err(CliError::Usage(format!("{} starts at T1, which the run never reaches", id.name())));
            }
            report.phases.t1.max(rate.default_monitor_start())
        }
        None => rate.default_monitor_start(),
    };
    let trace = trace_functional(&traj, id, &rate, profile, &params, start)?;
    let checks = contact_point_decrease(&trace, &traj, report.primary(), plan.integrator().zero_tol);
    let summary = MonitorSummary {
        functional: id.name().into(),
        start,
        contacts: checks.len(),
        contacts_off_origin: checks.iter().filter(|c| !c.at_origin).count(),
        failing: failures(&checks),
        phases: report.phases,
        t2_bound: report.t2_bound,
    };
    let trace_path = write_file(&dir, "trace.csv", &trace_csv(&trace))?;
    let json_path = write_file(&dir, "monitor.json", &to_json(&summary))?;
    let mut text = String::new();
    let _ = writeln!(text, "{}", report.summary_line());
    let _ = writeln!(
        text,
        "{} from t = {start}: contacts={}, off_origin={}, failing={}",
        summary.functional, summary.contacts, summary.contacts_off_origin, summary.failing
    );
    let _ = writeln!(text, "wrote {}\nwrote {}", trace_path.display(), json_path.display());
    Ok(text)
}

/// Set the value at a dotted path such as `scalar.gains.c4` or
/// `network.drive.0`. Missing object keys are created.
pub fn set_path(root: &mut Value, path: &str, new: Value) -> Result<(), CliError> {
    let bad = |msg: String| CliError::Config { field: path.to_string(), message: msg };
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(bad("empty path segment".into()));
    }
    let mut cur = root;
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert((*part).to_string(), new);
                    return Ok(());
                }
                map.entry((*part).to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = part.parse().map_err(|_| bad(format!("`{part}` is not an array index")))?;
                let len = items.len();
                let slot = items.get_mut(idx).ok_or_else(|| bad(format!("index {idx} out of range ({len} items)")))?;
                if last {
                    *slot = new;
                    return Ok(());
                }
                slot
            }
            _ => return Err(bad(format!("`{}` is not an object or array", parts[..i].join(".")))),
        };
    }
    unreachable!("loop returns on the last segment")
}

/// One row of a sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub feasible: Option<bool>,
    pub t1: f64,
    pub t_settle: f64,
    pub t2_bound: Option<f64>,
    pub violations: usize,
    pub final_norm: f64,
}

/// Run `base` once per value of `param`, in parallel; rows keep the order
/// of `values`.
pub fn sweep_rows(base: &ExperimentConfig, param: &str, values: &[f64]) -> Result<Vec<SweepRow>, CliError> {
    let base_value = serde_json::to_value(base).expect("config serializes");
    values
        .par_iter()
        .map(|&v| {
            let mut doc = base_value.clone();
            set_path(&mut doc, param, Value::from(v))?;
            let cfg = ExperimentConfig::from_value(doc)?;
            let run = run(cfg.plan()?)?;
            let r = run.report();
            Ok(SweepRow {
                value: v,
                feasible: r.primary().map(|c| c.feasible),
                t1: r.phases.t1,
                t_settle: r.phases.t_settle,
                t2_bound: r.t2_bound,
                violations: r.phases.envelope_violations,
                final_norm: r.final_norm,
            })
        })
        .collect()
}

pub fn sweep_csv(param: &str, rows: &[SweepRow]) -> String {
    let mut out = format!("{param},feasible,T1,T_settle,T2_bound,violations,final_norm\n");
    for r in rows {
        let feasible = r.feasible.map_or(String::new(), |f| f.to_string());
        let bound = r.t2_bound.map_or(String::new(), |b| b.to_string());
        let _ =
            writeln!(out, "{},{feasible},{},{},{bound},{},{:e}", r.value, r.t1, r.t_settle, r.violations, r.final_norm);
    }
    out
}

fn sweep_table(param: &str, rows: &[SweepRow]) -> String {
    let mut out = format!("{param:>12}  {:>10}  {:>9}  {:>9}  {:>9}\n", "feasible", "T1", "T_settle", "T2_bound");
    for r in rows {
        let feasible = r.feasible.map_or("-".to_string(), |f| f.to_string());
        let bound = r.t2_bound.map_or("-".to_string(), fmt_time);
        let _ = writeln!(
            out,
            "{:>12}  {feasible:>10}  {:>9}  {:>9}  {bound:>9}",
            r.value,
            fmt_time(r.t1),
            fmt_time(r.t_settle)
        );
    }
    out
}

/// `sweep`: vary one parameter, write `sweep.csv`.
pub fn sweep(cfg: &ExperimentConfig, param: &str, values: &[f64], out: &OutputOptions) -> Result<String, CliError> {
    if values.is_empty() {
        return Err(CliError::Usage("no sweep values given".into()));
    }
    let dir = out.dir_for(&cfg.plan()?);
    let rows = sweep_rows(cfg, param, values)?;
    let path = write_file(&dir, "sweep.csv", &sweep_csv(param, &rows))?;
    Ok(format!("{}wrote {}\n", sweep_table(param, &rows), path.display()))
}

/// Variants of the scalar worked example.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Example1 {
    Static,
    Adaptive,
    SweepC3,
    SweepC4,
}

/// Horizon for adaptive scalar runs: the gains stop moving only once the
/// delay window has cleared the settling time.
pub const ADAPTIVE_HORIZON: f64 = 45.0;

/// Configuration of a scalar example variant.
pub fn example1_config(variant: Example1, norm: Norm) -> ExperimentConfig {
    let static_gains = Some(GainsBlock { c3: 2.1, c4: 3.5 });
    match variant {
        Example1::Static | Example1::SweepC3 | Example1::SweepC4 => ExperimentConfig::example1(static_gains, None),
        Example1::Adaptive => {
            let mut cfg = ExperimentConfig::example1(None, Some(AdaptiveBlock { d1: 0.1, d2: 0.1, d3: 0.1, norm }));
            let horizon = if norm == Norm::Two { ADAPTIVE_HORIZON } else { 2.0 * ADAPTIVE_HORIZON };
            cfg.integrator.as_mut().expect("example sets the integrator").horizon = Some(horizon);
            cfg
        }
    }
}

pub fn example1(variant: Example1, norm: Norm, out: &OutputOptions) -> Result<String, CliError> {
    let cfg = example1_config(variant, norm);
    let (param, values) = match variant {
        Example1::Static | Example1::Adaptive => {
            let mut text = simulate(&cfg, out)?;
            if variant == Example1::Static {
                text = check(&cfg, false)? + &text;
            }
            return Ok(text);
        }
        Example1::SweepC3 => ("scalar.gains.c3", [2.1, 3.0, 5.0]),
        Example1::SweepC4 => ("scalar.gains.c4", [3.5, 4.5, 6.0]),
    };
    sweep(&cfg, param, &values, out)
}

/// Variants of the network worked example.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Example2 {
    NoControl,
    AdaptiveFull,
}

pub fn example2_config(variant: Example2) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::lorenz();
    if variant == Example2::AdaptiveFull {
        cfg.network.as_mut().expect("network config").control = Some(ControlBlock {
            kind: ControlKind::FullNode,
            sigma: None,
            theta3: 0.0,
            theta4: 0.0,
            adaptive: Some(RatesBlock { d1: 0.05, d2: 0.05, d3: 0.02 }),
        });
    }
    cfg
}

/// `example2`: the no-control baseline writes `indices.csv`
/// (`t,E1,E2,E`); the adaptive run writes `gains.csv` (`t,E,theta3,theta4`)
/// and `report.json`.
pub fn example2(variant: Example2, out: &OutputOptions) -> Result<String, CliError> {
    let cfg = example2_config(variant);
    let plan = cfg.plan()?;
    let dir = out.dir_for(&plan);
    let stride = out.stride_for(&plan);
    let run = run(plan)?;
    let Run::Network { plan, result, report } = &run else { unreachable!("network config") };
    let mut written = Vec::new();
    match variant {
        Example2::NoControl => {
            written.push(write_file(&dir, "indices.csv", &indices_csv(plan, result, stride))?);
            let min_e =
                (0..result.error.len()).map(|k| Norm::Two.norm(result.error.state(k))).fold(f64::INFINITY, f64::min);
            let mut text = summarize_run(&run, &written);
            let _ = writeln!(text, "min ||E|| over the run = {min_e:.4}");
            Ok(text)
        }
        Example2::AdaptiveFull => {
            written.push(write_file(&dir, "gains.csv", &gains_csv(result, stride))?);
            written.push(write_file(&dir, "report.json", &to_json(report))?);
            Ok(summarize_run(&run, &written))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn set_path_objects_and_arrays() {
        let mut v = json!({"a": {"b": 1.0}, "c": [1.0, 2.0]});
        set_path(&mut v, "a.b", json!(3.0)).unwrap();
        set_path(&mut v, "c.1", json!(5.0)).unwrap();
        set_path(&mut v, "d.e", json!(7.0)).unwrap();
        assert_eq!(v, json!({"a": {"b": 3.0}, "c": [1.0, 5.0], "d": {"e": 7.0}}));
        assert!(set_path(&mut v, "c.9", json!(0.0)).is_err());
        assert!(set_path(&mut v, "a.b.x", json!(0.0)).is_err());
        assert!(set_path(&mut v, "a..b", json!(0.0)).is_err());
    }

    #[test]
    fn static_example_check_table() {
        let text = check(&example1_config(Example1::Static, Norm::Two), true).unwrap();
        assert!(text.contains("\n2-norm: feasible, threshold c4 > 3.071\n"), "{text}");
        assert!(text.contains("sign condition: c3 > 2 required"), "{text}");
    }

    #[test]
    fn infeasible_guarantee_exits_with_two() {
        let mut cfg = example1_config(Example1::Static, Norm::Two);
        cfg.scalar.as_mut().unwrap().gains = Some(GainsBlock { c3: 2.1, c4: 1.0 });
        let e = check(&cfg, true).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(check(&cfg, false).unwrap().contains("infeasible"));
    }

    #[test]
    fn sweep_keeps_order() {
        let mut cfg = example1_config(Example1::Static, Norm::Two);
        cfg.integrator.as_mut().unwrap().horizon = Some(5.0);
        let rows = sweep_rows(&cfg, "scalar.gains.c4", &[6.0, 3.5, 4.5]).unwrap();
        let v: Vec<f64> = rows.iter().map(|r| r.value).collect();
        assert_eq!(v, vec![6.0, 3.5, 4.5]);
        assert!(rows[0].t_settle < rows[2].t_settle && rows[2].t_settle < rows[1].t_settle);
    }

    #[test]
    fn zero_delay_uses_delay_free_constants() {
        let mut cfg = example1_config(Example1::Static, Norm::Two);
        cfg.delay = Some(crate::config::DelayBlock::Constant { pi: 0.0 });
        let Plan::Scalar(plan) = cfg.plan().unwrap() else { unreachable!() };
        let (conds, note) = conditions(&Plan::Scalar(plan)).unwrap();
        assert!(note.is_none());
        // delay-free 2-norm threshold: c1 + |c2|
        assert!((conds[0].linear_threshold.unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn network_sign_threshold() {
        let text = check(&example2_config(Example2::AdaptiveFull), false).unwrap();
        assert!(text.contains("sign condition: theta3 > 9 required"), "{text}");
    }
}
