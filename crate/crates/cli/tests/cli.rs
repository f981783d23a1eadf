use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_delayfts"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("delayfts-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn template(which: &str, dir: &Path) -> PathBuf {
    let o = run(&["template", which]);
    assert!(o.status.success(), "{}", stderr(&o));
    let path = dir.join(format!("{which}.json"));
    std::fs::write(&path, &o.stdout).unwrap();
    path
}

fn edit(path: &Path, f: impl FnOnce(&mut serde_json::Value)) {
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    f(&mut v);
    std::fs::write(path, v.to_string()).unwrap();
}

#[test]
fn check_reports_threshold_and_exit_codes() {
    let dir = scratch("check");
    let cfg = template("scalar-static", &dir);
    let o = run(&["check", cfg.to_str().unwrap(), "--require-feasible"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("2-norm: feasible, threshold c4 > 3.071\n"));

    edit(&cfg, |v| v["scalar"]["gains"]["c4"] = 1.0.into());
    let o = run(&["check", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("2-norm: infeasible"));
    let o = run(&["check", cfg.to_str().unwrap(), "--require-feasible"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_names_the_field() {
    let dir = scratch("badcfg");
    let cfg = template("scalar-static", &dir);
    edit(&cfg, |v| v["integrator"]["h"] = (-1.0).into());
    let o = run(&["simulate", cfg.to_str().unwrap(), "-o", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("integrator.h"), "{}", stderr(&o));

    edit(&cfg, |v| v["scalar"]["gain"] = serde_json::json!({}));
    let o = run(&["check", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("scalar"), "{}", stderr(&o));

    let o = run(&["check", dir.join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_writes_trajectory_and_report() {
    let dir = scratch("simulate");
    let cfg = template("scalar-static", &dir);
    edit(&cfg, |v| v["integrator"]["horizon"] = 5.0.into());
    let out = dir.join("out");
    let o = run(&["simulate", cfg.to_str().unwrap(), "-o", out.to_str().unwrap(), "--stride", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("T1=0.8580, T_settle=1.2940"), "{}", stdout(&o));

    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 501);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["phases"]["envelope_violations"], 0);
    assert_eq!(report["conditions"][0]["theorem"], "scalar2_norm");
    let echoed = std::fs::read_to_string(out.join("config.json")).unwrap();
    let again = dir.join("again");
    let o =
        run(&["simulate", out.join("config.json").to_str().unwrap(), "-o", again.to_str().unwrap(), "--stride", "10"]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(again.join("config.json")).unwrap(), echoed);
    assert_eq!(std::fs::read_to_string(again.join("trajectory.csv")).unwrap(), csv);
}

#[test]
fn monitor_emits_trace_and_summary() {
    let dir = scratch("monitor");
    let cfg = template("scalar-static", &dir);
    edit(&cfg, |v| v["integrator"]["horizon"] = 3.0.into());
    let o = run(&["monitor", cfg.to_str().unwrap(), "-f", "v2", "-o", dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("T2_bound=11.9691, violations=0"), "{text}");
    assert!(text.contains("failing=0"), "{text}");
    let trace = std::fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("t,V,W,contact"));

    let sim = dir.join("sim");
    let o = run(&["simulate", cfg.to_str().unwrap(), "-o", sim.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = sim.join("trajectory.csv");
    let from_csv = dir.join("from-csv");
    let o =
        run(&["monitor", cfg.to_str().unwrap(), csv.to_str().unwrap(), "-f", "v2", "-o", from_csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().take(2).collect::<Vec<_>>(), text.lines().take(2).collect::<Vec<_>>());
    assert_eq!(std::fs::read_to_string(from_csv.join("trace.csv")).unwrap(), trace);

    let o = run(&["monitor", cfg.to_str().unwrap(), "-f", "V9", "-o", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("monitor.functional"));
}

#[test]
fn sweep_orders_rows_by_input() {
    let dir = scratch("sweep");
    let cfg = template("scalar-static", &dir);
    edit(&cfg, |v| v["integrator"]["horizon"] = 3.0.into());
    let o = run(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--param",
        "scalar.gains.c3",
        "--values",
        "5,2.1,3",
        "-o",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    let firsts: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(firsts, ["5", "2.1", "3"]);
}

#[test]
fn example2_adaptive_writes_gain_columns() {
    let dir = scratch("example2");
    let o = run(&["example2", "--variant", "adaptive-full", "-o", dir.to_str().unwrap(), "--stride", "100"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.join("gains.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,E,theta3,theta4"));
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(last[0], 20.0);
    assert!(last[1] < 1e-3);
    assert!(last[2] > 0.0 && last[3] > 0.0);

    let o = run(&["example2", "--variant", "no-control", "-o", dir.to_str().unwrap(), "--stride", "100"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.join("indices.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,E1,E2,E"));
}
