//! End-to-end CLI behavior: exit codes, file outputs, config-file merging,
//! and cross-subcommand consistency, all through the real binary.

use std::path::Path;
use std::process::{Command, Output};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minimax-bench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn run_writes_trace_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(&[
        "run",
        "--problem",
        "toy",
        "--eta-x",
        "0.5",
        "--eta-y",
        "0.5",
        "--tol",
        "1e-4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("final residual"), "stdout: {stdout}");
    assert!(stdout.contains("converged"));

    let trace = read(&dir.path().join("trace.csv"));
    assert!(trace.starts_with("k,residual,delta_gap,delta_dist,psi,Psi,calls_x,calls_y\n"));
    let meta: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("run.json"))).unwrap();
    assert_eq!(meta["termination"], "converged");
    assert_eq!(meta["method"], "alt-gda");
    assert!(meta["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert!(meta["final_residual"].as_f64().unwrap() <= 1e-4);
    // wall time never lands in the trace, so reruns stay byte-comparable
    assert!(!trace.contains("wall"));
}

#[test]
fn save_iterates_writes_visited_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(&[
        "run",
        "--problem",
        "fair",
        "--eta-x",
        "0.05",
        "--eta-y",
        "0.2",
        "--max-iters",
        "5",
        "--save-iterates",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let iterates = read(&dir.path().join("iterates.csv"));
    let mut lines = iterates.lines();
    assert_eq!(lines.next().unwrap(), "k,x0,x1,y0,y1,y2");
    assert_eq!(lines.count(), 5);
}

#[test]
fn divergence_is_a_completed_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(&[
        "run",
        "--problem",
        "bilinear",
        "--method",
        "sim-gda",
        "--eta-x",
        "0.5",
        "--eta-y",
        "0.5",
        "--max-iters",
        "2000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let meta: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("run.json"))).unwrap();
    assert_eq!(meta["termination"], "diverged");
}

#[test]
fn zero_budget_run_completes_with_empty_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(&[
        "run",
        "--problem",
        "toy",
        "--eta-x",
        "0.5",
        "--eta-y",
        "0.5",
        "--max-iters",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let trace = read(&dir.path().join("trace.csv"));
    assert_eq!(trace, "k,residual,delta_gap,delta_dist,psi,Psi,calls_x,calls_y\n");
    let meta: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("run.json"))).unwrap();
    assert_eq!(meta["termination"], "max-iters");
    assert_eq!(meta["iterations"], 0);
    assert_eq!(meta["calls_x"], 0);
    assert_eq!(meta["calls_y"], 0);
}

#[test]
fn usage_errors_exit_two() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["run", "--eta-x", "0.5", "--eta-y", "0.5"], // no problem
        vec!["run", "--problem", "toy"],                 // no stepsizes
        vec!["run", "--problem", "no-such-problem", "--eta-x", "0.5", "--eta-y", "0.5"],
        vec!["run", "--problem", "toy", "--method", "newton", "--eta-x", "0.5", "--eta-y", "0.5"],
        vec!["run", "--problem", "toy", "--schedule", "warp-speed"],
        // bilinear carries no curvature, so every schedule refuses it
        vec!["run", "--problem", "bilinear", "--schedule", "nc-sc"],
        vec!["run", "--problem", "toy", "--eta-x", "0.5", "--eta-y", "0.5", "--param", "k=v"],
        vec!["grid", "--problem", "toy", "--methods", ""],
        vec!["grid", "--problem", "toy", "--target", "0"],
        vec!["check", "--inject-fault", "no-such-component"],
        vec!["check", "--filter", "zzz-no-match"],
    ];
    for args in cases {
        let out = bench(&args);
        assert_eq!(
            exit_code(&out),
            2,
            "expected exit 2 for {args:?}; stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stderr.is_empty(), "no error message for {args:?}");
    }
}

#[test]
fn config_file_underlies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("base.json");
    std::fs::write(
        &config_path,
        r#"{
            "problem": "toy",
            "eta-x": 0.5,
            "eta-y": 0.5,
            "max-iters": 7,
            "seed": 3
        }"#,
    )
    .unwrap();
    let out_dir = dir.path().join("from-config");
    let out = bench(&[
        "run",
        "--config",
        config_path.to_str().unwrap(),
        "--max-iters",
        "9",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let meta: serde_json::Value = serde_json::from_str(&read(&out_dir.join("run.json"))).unwrap();
    // flag beats config; untouched config entries survive
    assert_eq!(meta["max_iters"], 9);
    assert_eq!(meta["seed"], 3);
    assert_eq!(meta["eta_x"], 0.5);
}

#[test]
fn unknown_config_key_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.json");
    std::fs::write(&config_path, r#"{"problem": "toy", "stepsize": 0.5}"#).unwrap();
    let out = bench(&["run", "--config", config_path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("stepsize"), "stderr: {stderr}");
}

#[test]
fn check_filter_and_fault_injection() {
    let ok = bench(&["check", "--filter", "moreau"]);
    assert_eq!(exit_code(&ok), 0);
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.contains("check moreau-closed-form: ok"));
    assert!(stdout.contains("check moreau-identity: ok"));
    assert!(!stdout.contains("grad-fd"));

    let tripped = bench(&["check", "--inject-fault", "simplex-vs-qp"]);
    assert_eq!(exit_code(&tripped), 1);
    let stdout = String::from_utf8_lossy(&tripped.stdout);
    assert!(stdout.contains("check simplex-vs-qp: FAILED"));
    assert!(stdout.contains("simplex-vs-qp"), "failing check must be named");
}

#[test]
fn single_cell_grid_matches_run_call_count() {
    let dir = tempfile::tempdir().unwrap();
    let grid_dir = dir.path().join("grid");
    let out = bench(&[
        "grid",
        "--problem",
        "toy",
        "--methods",
        "alt-gda",
        "--eta-x-min",
        "0.5",
        "--eta-x-max",
        "0.5",
        "--eta-x-points",
        "1",
        "--eta-y-min",
        "0.5",
        "--eta-y-max",
        "0.5",
        "--eta-y-points",
        "1",
        "--budget",
        "10000",
        "--target",
        "1e-4",
        "--out",
        grid_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let heatmap = read(&grid_dir.join("heatmap.csv"));
    let mut lines = heatmap.lines();
    assert_eq!(lines.next().unwrap(), "eta_x,eta_y,method,calls");
    let row = lines.next().unwrap();
    let grid_calls: u64 = row.rsplit(',').next().unwrap().parse().unwrap();

    let run_dir = dir.path().join("run");
    let out = bench(&[
        "run",
        "--problem",
        "toy",
        "--eta-x",
        "0.5",
        "--eta-y",
        "0.5",
        "--tol",
        "1e-4",
        "--max-iters",
        "5000",
        "--out",
        run_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let meta: serde_json::Value = serde_json::from_str(&read(&run_dir.join("run.json"))).unwrap();
    let run_calls = meta["calls_x"].as_u64().unwrap() + meta["calls_y"].as_u64().unwrap();
    assert_eq!(
        grid_calls, run_calls,
        "grid cell and direct run disagree on oracle calls"
    );
}

#[test]
fn schedule_plan_is_echoed_in_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(&[
        "run",
        "--problem",
        "toy",
        "--schedule",
        "nc-sc",
        "--max-iters",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let meta: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("run.json"))).unwrap();
    assert_eq!(meta["schedule"], "nc-sc");
    assert_eq!(meta["schedule_plan"]["regime"], "nc-sc");
    assert_eq!(meta["metric"], "max-grad-norm");
    let eta_y = meta["eta_y"].as_f64().unwrap();
    assert!((eta_y - 0.5615528128088303).abs() < 1e-12);
}
