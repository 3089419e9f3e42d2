//! End-to-end tests driving the compiled binary.

use std::path::Path;
use std::process::{Command, Output};

fn optbench(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optbench"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL_PLAN: &str = r#"{
    "problems": ["beale", "rosenbrock-2"],
    "solvers": [{"id": "compass"}, {"id": "nelder-mead"}],
    "mode": {"fixed_cost": {"budget": 200}},
    "repeats": 1,
    "starting_points": {"radius": 0.2, "count": 2},
    "master_seed": 7,
    "timing_mode": "strict"
}"#;

#[test]
fn list_solvers_text_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let text = optbench(&["list", "solvers"], dir.path());
    assert!(text.status.success());
    for id in ["compass", "nelder-mead", "gradient-descent", "random-search"] {
        assert!(stdout(&text).contains(id), "missing {id}");
    }
    let json = optbench(&["list", "solvers", "--json"], dir.path());
    assert!(json.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&json)).expect("pure JSON output");
    assert_eq!(parsed.as_array().unwrap().len(), 4);
}

#[test]
fn list_problems_json_has_at_least_twenty() {
    let dir = tempfile::tempdir().unwrap();
    let out = optbench(&["list", "problems", "--json"], dir.path());
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(parsed.as_array().unwrap().len() >= 20);
}

#[test]
fn list_bad_category_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = optbench(&["list", "nonsense"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_results_and_plan_echo() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("plan.json"), SMALL_PLAN).unwrap();
    let out = optbench(&["run", "plan.json", "--out", "out"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    // 2 problems x 2 solvers x 2 starts x 1 repeat = 8 rows + header.
    assert_eq!(csv.lines().count(), 9);
    let echo: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/plan.json")).unwrap())
            .unwrap();
    assert_eq!(echo["resolved_master_seed"], 7);
    assert!(dir.path().join("out/histories").is_dir());
}

#[test]
fn run_rejects_unknown_plan_key() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SMALL_PLAN.replace("\"repeats\"", "\"repeatz\"");
    std::fs::write(dir.path().join("plan.json"), bad).unwrap();
    let out = optbench(&["run", "plan.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("repeatz"), "must name the unknown key");
}

#[test]
fn run_missing_plan_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = optbench(&["run", "no-such-plan.json"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn report_emits_requested_kinds_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("plan.json"), SMALL_PLAN).unwrap();
    let run = optbench(&["run", "plan.json", "--out", "out"], dir.path());
    assert!(run.status.success());
    let report = optbench(
        &[
            "report",
            "out/results.csv",
            "--test",
            "abs_f:1e-4",
            "--kinds",
            "tables,perf",
            "--out",
            "rep",
        ],
        dir.path(),
    );
    assert!(report.status.success(), "{}", stderr(&report));
    assert!(dir.path().join("rep/plots/perf_profile_log.svg").is_file());
    assert!(dir.path().join("rep/plots/perf_profile_linear.svg").is_file());
    assert!(dir.path().join("rep/plots/perf_log_compass.csv").is_file());
    assert!(dir.path().join("rep/tables/summary.csv").is_file());
    assert!(!dir.path().join("rep/plots/data_profile.svg").exists());
    let validate = optbench(
        &["report", "out/results.csv", "--out", "rep", "--validate"],
        dir.path(),
    );
    assert!(validate.status.success(), "{}", stderr(&validate));
}

#[test]
fn report_refuses_time_plots_on_throughput_tables() {
    let dir = tempfile::tempdir().unwrap();
    let plan = SMALL_PLAN.replace("\"strict\"", "\"throughput\"");
    std::fs::write(dir.path().join("plan.json"), plan).unwrap();
    let run = optbench(&["run", "plan.json", "--out", "out"], dir.path());
    assert!(run.status.success());
    let report = optbench(
        &["report", "out/results.csv", "--kinds", "runtime", "--out", "rep"],
        dir.path(),
    );
    assert_eq!(report.status.code(), Some(2));
    assert!(stderr(&report).contains("throughput"));
    // Evaluation-count profiles remain valid for throughput tables.
    let perf = optbench(
        &["report", "out/results.csv", "--kinds", "perf", "--out", "rep2"],
        dir.path(),
    );
    assert!(perf.status.success(), "{}", stderr(&perf));
}

#[test]
fn report_on_malformed_csv_names_the_row() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("plan.json"), SMALL_PLAN).unwrap();
    let run = optbench(&["run", "plan.json", "--out", "out"], dir.path());
    assert!(run.status.success());
    let path = dir.path().join("out/results.csv");
    let mut csv = std::fs::read_to_string(&path).unwrap();
    csv.push_str("corrupt,row\n");
    std::fs::write(&path, csv).unwrap();
    let report = optbench(&["report", "out/results.csv", "--out", "rep"], dir.path());
    assert_eq!(report.status.code(), Some(2));
    assert!(stderr(&report).contains("row 10"), "{}", stderr(&report));
}

#[test]
fn audit_pass_fail_and_usage_codes() {
    let dir = tempfile::tempdir().unwrap();
    let pass = optbench(&["audit", "sphere-2", "compass", "--shift", "1.0,1.0"], dir.path());
    assert_eq!(pass.status.code(), Some(0), "{}", stderr(&pass));
    assert!(stdout(&pass).contains("PASS"));

    // Nelder-Mead scales its initial simplex with the starting-point norm,
    // so translation changes its iterates: the audit fails by design.
    let fail = optbench(&["audit", "sphere-2", "nelder-mead", "--shift", "7.0,7.0"], dir.path());
    assert_eq!(fail.status.code(), Some(1), "{}", stderr(&fail));
    assert!(stdout(&fail).contains("FAIL"));

    let usage = optbench(&["audit", "sphere-2", "random-search"], dir.path());
    assert_eq!(usage.status.code(), Some(2));
}
