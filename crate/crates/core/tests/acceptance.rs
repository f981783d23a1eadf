//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use delayfts_core::conditions::{
    check_scalar_theorem, lambda_max_sym, left_eigenvector, settling_bound, CheckOptions, SpectralKind,
};
use delayfts_core::integrator::settling_time;
use delayfts_core::monitors::{
    contact_point_decrease, detect_phases, failures, restrict, trace_functional, ContactCheck, FunctionalId,
    FunctionalParams, PhaseReport,
};
use delayfts_core::network::{example2, Example2Variant, SyncResult};
use delayfts_core::scalar::{example1_adaptive, example1_static, ScalarExperiment, ScalarSystem};
use delayfts_core::{
    AdaptiveRates, Asymptotics, DelayProfile, HistoryTrajectory, Norm, RateFunction, StaticScalarGains,
};
use nalgebra::DMatrix;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

const THRESHOLD_TOL: f64 = 1e-6;
const KAPPA: f64 = 0.9;
const ZERO_TOL: f64 = 1e-9;
const XI_TOL: f64 = 1e-10;
const NO_CONTROL_FLOOR: f64 = 0.1;
const SYNC_CEILING: f64 = 1e-3;
const AGREE_TOL: f64 = 1e-12;
const C1: f64 = 1.0;
const C2: f64 = 2.0;
const Q: f64 = 0.5;
const RHO: f64 = 0.1;
/// Horizon of the adaptive runs: the gains freeze only once the window
/// `[t/2, t]` has cleared the settling time, so they need roughly twice it.
const ADAPTIVE_HORIZON: f64 = 45.0;
const NORM_VARIANT_HORIZON: f64 = 80.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn example1_asym() -> Asymptotics {
    Asymptotics { beta: 0.0, eta: (1.0 - Q).powf(-RHO) - 1.0 }
}

fn example1_phases(tr: &HistoryTrajectory, eps2: f64) -> PhaseReport {
    let prof = DelayProfile::proportional(Q, 1).unwrap();
    detect_phases(tr, &prof, &delayfts_core::WindowFunctional::SqNorm2, eps2, ZERO_TOL).unwrap()
}

fn settle(c3: f64, c4: f64, h: f64) -> f64 {
    let mut e = example1_static(c3, c4).unwrap();
    e.integrator.h = h;
    settling_time(&e.run().unwrap(), ZERO_TOL)
}

fn criterion1() -> Outcome {
    let g = StaticScalarGains::new(C1, C2, 2.1, 3.5).unwrap();
    let r = check_scalar_theorem(&g, 1, example1_asym(), Norm::Two, CheckOptions::with_eps1(2f64.powf(0.05))).unwrap();
    let th = r.linear_threshold.unwrap();
    let expected = 1.0 + 2f64.powf(1.05);
    outcome(
        (th - expected).abs() <= THRESHOLD_TOL && r.feasible,
        format!("c4 threshold {th:.8} vs 1+2^1.05 = {expected:.8}, feasible at c4=3.5: {}", r.feasible),
    )
}

struct StaticRun {
    traj: HistoryTrajectory,
    phases: PhaseReport,
    bound: f64,
}

fn static_run(h: f64) -> StaticRun {
    let g = StaticScalarGains::new(C1, C2, 2.1, 3.5).unwrap();
    let report =
        check_scalar_theorem(&g, 1, example1_asym(), Norm::Two, CheckOptions::with_eps1(2f64.powf(0.05))).unwrap();
    let mut e = example1_static(2.1, 3.5).unwrap();
    e.integrator.h = h;
    let traj = e.run().unwrap();
    let phases = example1_phases(&traj, KAPPA * report.epsilon2_max);
    let bound = settling_bound(&report, phases.t1, KAPPA).unwrap_or(f64::NAN);
    StaticRun { traj, phases, bound }
}

fn criterion2(run: &StaticRun) -> Outcome {
    let p = &run.phases;
    outcome(
        p.t_settle.is_finite() && p.envelope_violations == 0 && p.t_settle <= run.bound,
        format!(
            "T1 = {:.4}, T_settle = {:.4}, bound T1 + 1/eps2 = {:.4}, envelope violations = {}",
            p.t1, p.t_settle, run.bound, p.envelope_violations
        ),
    )
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] < w[0])
}

fn criterion3() -> Outcome {
    let by_c4: Vec<f64> = [3.5, 4.5, 6.0].iter().map(|&c4| settle(2.1, c4, 1e-3)).collect();
    let by_c3: Vec<f64> = [2.1, 3.0, 5.0].iter().map(|&c3| settle(c3, 3.5, 1e-3)).collect();
    outcome(
        strictly_decreasing(&by_c4) && strictly_decreasing(&by_c3),
        format!("T_settle over c4 = 3.5/4.5/6.0: {by_c4:.4?}; over c3 = 2.1/3.0/5.0: {by_c3:.4?}"),
    )
}

fn criterion4() -> Outcome {
    let mut e = example1_static(2.1, 1.0).unwrap();
    e.integrator.horizon = 50.0;
    let tr = e.run().unwrap();
    let p = example1_phases(&tr, 0.09);
    outcome(
        p.t1.is_infinite() && p.t_settle.is_infinite(),
        format!("c4 = 1: T1 = {}, T_settle = {}, |p(50)| = {:.3e}", p.t1, p.t_settle, tr.last_state()[0].abs()),
    )
}

fn nondecreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0])
}

/// Settling time, gain freeze time, and gain monotonicity of an adaptive run.
fn adaptive_summary(tr: &HistoryTrajectory) -> (f64, f64, bool) {
    let ts = settling_time(tr, ZERO_TOL);
    let g: Vec<Vec<f64>> = (0..tr.gain_dim()).map(|c| tr.gain_series(c)).collect();
    let monotone = g.iter().all(|s| nondecreasing(s));
    let last_change = (1..tr.len()).rev().find(|&k| g.iter().any(|s| s[k] != s[k - 1]));
    let frozen_from = last_change.map_or(tr.t0(), |k| tr.time(k));
    (ts, frozen_from, monotone)
}

fn adaptive_example1(norm: Norm, horizon: f64) -> HistoryTrajectory {
    let mut e: ScalarExperiment = example1_adaptive(AdaptiveRates::new(0.1, 0.1, 0.1).unwrap(), norm).unwrap();
    e.integrator.horizon = horizon;
    e.run().unwrap()
}

fn criterion5() -> Outcome {
    let tr = adaptive_example1(Norm::Two, ADAPTIVE_HORIZON);
    let h = tr.step();
    let (ts, frozen, monotone) = adaptive_summary(&tr);
    // the window [t - qt, t] first excludes every nonzero state at t = T_settle / (1 - q)
    let expected = ts / (1.0 - Q);
    let pass = ts.is_finite() && monotone && (frozen - expected).abs() <= 2.0 * h && frozen < tr.current_time();
    let last = tr.gains(tr.len() - 1);
    outcome(
        pass,
        format!(
            "T_settle = {ts:.4}, gains frozen from {frozen:.4} (window clears at {expected:.4}), c3 = {:.4}, c4 = {:.4}, nondecreasing: {monotone}",
            last[0], last[1]
        ),
    )
}

fn random_coupling(runner: &mut TestRunner) -> DMatrix<f64> {
    let strat =
        (2usize..=6).prop_flat_map(|n| proptest::collection::vec(0.05f64..5.0, n * n).prop_map(move |w| (n, w)));
    let (n, w) = strat.new_tree(runner).unwrap().current();
    let mut a = DMatrix::from_row_slice(n, n, &w);
    for i in 0..n {
        a[(i, i)] = 0.0;
        let s: f64 = a.row(i).sum();
        a[(i, i)] = -s;
    }
    a
}

fn criterion6() -> Outcome {
    let a = DMatrix::from_row_slice(3, 3, &[-5.0, 2.0, 3.0, 1.0, -4.0, 3.0, 1.0, 2.0, -3.0]);
    let xi = left_eigenvector(&a).unwrap();
    let err = xi.iter().zip([1.0 / 6.0, 1.0 / 3.0, 0.5]).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    let mut runner = TestRunner::deterministic();
    let mut worst = f64::NEG_INFINITY;
    let mut mats = vec![a.clone()];
    mats.extend((0..20).map(|_| random_coupling(&mut runner)));
    for m in &mats {
        let xi = left_eigenvector(m).unwrap();
        for sigma in [0.1, 1.0, 10.0] {
            worst = worst.max(lambda_max_sym(m, &xi, sigma, 0.0, 0.0, SpectralKind::Tilde).unwrap());
        }
    }
    outcome(
        err <= XI_TOL && worst < 0.0,
        format!("xi error {err:.2e}; largest lambda_max over 21 matrices x 3 sigmas = {worst:.4e}"),
    )
}

fn norm_series(r: &SyncResult) -> Vec<f64> {
    (0..r.error.len()).map(|k| r.error.state(k).iter().map(|v| v * v).sum::<f64>().sqrt()).collect()
}

fn criterion7(controlled: &SyncResult) -> Outcome {
    let free = example2(Example2Variant::NoControl).unwrap().simulate().unwrap();
    let min_free = norm_series(&free).into_iter().fold(f64::INFINITY, f64::min);
    let end = *norm_series(controlled).last().unwrap();
    let (_, _, monotone) = adaptive_summary(&controlled.error);
    let theta = controlled.error.gains(controlled.error.len() - 1);
    outcome(
        min_free > NO_CONTROL_FLOOR && end < SYNC_CEILING && monotone,
        format!(
            "no control: min ||E|| = {min_free:.4}; adaptive: ||E(20)|| = {end:.2e}, theta3 = {:.4}, theta4 = {:.4}, nondecreasing: {monotone}",
            theta[0], theta[1]
        ),
    )
}

fn summarize(checks: &[ContactCheck]) -> (usize, usize, usize) {
    (checks.len(), checks.iter().filter(|c| !c.at_origin).count(), failures(checks))
}

fn criterion8(run: &StaticRun, controlled: &SyncResult) -> Outcome {
    let prof = DelayProfile::proportional(Q, 1).unwrap();
    let rate = RateFunction::Power { rho: RHO };
    let start = rate.default_monitor_start();
    let v1 = trace_functional(&run.traj, FunctionalId::V1, &rate, &prof, &FunctionalParams::default(), start).unwrap();
    let v1 = restrict(&v1, start, run.phases.t1);
    let c1 = summarize(&contact_point_decrease(&v1, &run.traj, None, ZERO_TOL));
    let p2 = FunctionalParams { eps2: Some(run.phases.eps2), ..Default::default() };
    let v2 = trace_functional(&run.traj, FunctionalId::V2, &rate, &prof, &p2, run.phases.t1).unwrap();
    let c2 = summarize(&contact_point_decrease(&v2, &run.traj, None, ZERO_TOL));

    let exp = example2(Example2Variant::default()).unwrap();
    let xi: Vec<f64> = left_eigenvector(&exp.model.a).unwrap().iter().copied().collect();
    let pn = FunctionalParams { xi: Some(xi), ..Default::default() };
    let vb =
        trace_functional(&controlled.error, FunctionalId::Vbar1, &exp.rate, &exp.model.delays, &pn, start).unwrap();
    let c3 = summarize(&contact_point_decrease(&vb, &controlled.error, None, ZERO_TOL));

    // sensitivity: the same check on sub-threshold gains must flag increases
    let mut weak = example1_static(2.1, 1.0).unwrap();
    weak.integrator.horizon = 10.0;
    let weak_traj = weak.run().unwrap();
    let vw = trace_functional(&weak_traj, FunctionalId::V1, &rate, &prof, &FunctionalParams::default(), start).unwrap();
    let cw = summarize(&contact_point_decrease(&vw, &weak_traj, None, ZERO_TOL));
    outcome(
        c1.2 + c2.2 + c3.2 == 0 && cw.2 > 0,
        format!(
            "(contacts, off-origin, failing): V1 {c1:?}, V2 {c2:?}, network weighted V1 {c3:?}; c4 = 1 diagnostic V1 {cw:?}"
        ),
    )
}

fn criterion9(run: &StaticRun) -> Outcome {
    let fine = static_run(5e-4);
    let shift = (fine.phases.t_settle - run.phases.t_settle).abs();
    let h = 1e-3;
    let sys = ScalarSystem::with_static(
        StaticScalarGains::new(0.0, 0.0, 1.5, 0.0).unwrap(),
        DelayProfile::proportional(Q, 1).unwrap(),
    )
    .unwrap();
    let exp = ScalarExperiment {
        system: sys,
        initial: vec![3.0],
        integrator: delayfts_core::IntegratorConfig::new(h, 4.0),
        adaptive: None,
    };
    let ts = settling_time(&exp.run().unwrap(), ZERO_TOL);
    outcome(
        shift < 2.0 * h && (ts - 2.0).abs() <= h,
        format!(
            "T_settle shift under h/2 = {shift:.2e} (< {:.0e}); sign system settles at {ts:.4} (|p0|/c3 = 2)",
            2.0 * h
        ),
    )
}

fn criterion10() -> Outcome {
    let asym = Asymptotics::delay_free();
    let mut agree = true;
    let mut cases = 0;
    for c1 in [-1.0, 0.0, 1.0, 2.5] {
        for c2 in [0.0, 0.5, 2.0] {
            for c4 in [0.0, 1.0, 3.0, 6.0] {
                for c3 in [0.0, 1.0, 3.0] {
                    let g = StaticScalarGains::new(c1, c2, c3, c4).unwrap();
                    let r: Vec<_> = [Norm::Two, Norm::One, Norm::Inf]
                        .iter()
                        .map(|&n| check_scalar_theorem(&g, 1, asym, n, CheckOptions::default()).unwrap())
                        .collect();
                    let lin = c1 - c4 + c2;
                    agree &= r.iter().all(|x| x.feasible == r[0].feasible);
                    agree &= (r[0].lhs - 2.0 * lin).abs() <= AGREE_TOL && (r[1].lhs - lin).abs() <= AGREE_TOL;
                    agree &= (r[2].lhs - lin).abs() <= AGREE_TOL;
                    cases += 1;
                }
            }
        }
    }
    let mut settled = Vec::new();
    for norm in [Norm::One, Norm::Inf] {
        let tr = adaptive_example1(norm, NORM_VARIANT_HORIZON);
        let (ts, _, monotone) = adaptive_summary(&tr);
        settled.push((norm, ts, monotone));
    }
    let ok = settled.iter().all(|(_, ts, m)| ts.is_finite() && *m);
    outcome(
        agree && ok,
        format!("verdicts agree on {cases} delay-free cases: {agree}; adaptive settling: {settled:.4?}"),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let run = static_run(1e-3);
    let controlled = example2(Example2Variant::default()).unwrap().simulate().unwrap();
    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "feasibility threshold", criterion1()),
        (2, "static convergence", criterion2(&run)),
        (3, "monotone control effect", criterion3()),
        (4, "sub-threshold non-convergence", criterion4()),
        (5, "adaptive scalar rules", criterion5()),
        (6, "left eigenvector and spectral sign", criterion6()),
        (7, "network baseline vs adaptive control", criterion7(&controlled)),
        (8, "contact-point decrease", criterion8(&run, &controlled)),
        (9, "integrator convergence", criterion9(&run)),
        (10, "norm variants", criterion10()),
    ];
    let mut failed = 0;
    for (id, name, o) in &results {
        println!("criterion {id:>2} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed in {:.1?}", results.len() - failed, started.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
