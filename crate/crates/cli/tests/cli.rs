use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn videstep(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_videstep"))
        .args(args)
        .current_dir(dir)
        .env_remove("VIDESTEP_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_prints_trajectory_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = videstep(
        &[
            "solve",
            "--problem",
            "test-equation",
            "--lambda",
            "-1",
            "--gamma",
            "-2",
            "--h",
            "0.005",
            "--xf",
            "5",
            "--method",
            "implicit",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("i,x,w,exact"));
    assert_eq!(lines.count(), 1001);
    assert_eq!(
        fs::read_dir(dir.path()).unwrap().count(),
        0,
        "nothing written to disk"
    );
}

#[test]
fn non_tiling_step_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = videstep(
        &["solve", "--h", "0.3", "--x0", "0", "--xf", "1"],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("does not tile"));
}

#[test]
fn unknown_flags_problems_and_keys_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&videstep(&["solve", "--bogus"], dir.path())), 2);
    assert_eq!(
        code(&videstep(&["solve", "--problem", "heat"], dir.path())),
        2
    );
    assert_eq!(code(&videstep(&["figure", "--id", "9"], dir.path())), 2);
    assert_eq!(code(&videstep(&["figure"], dir.path())), 2);
    fs::write(dir.path().join("bad.toml"), "h = 0.01\nstep = 3\n").unwrap();
    let out = videstep(&["solve", "--config", "bad.toml"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown field"));
}

#[test]
fn figure_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = videstep(&["figure", "--id", "1", "--out", "fig1.csv"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("fig1.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("i,x,delta_abs,c_curve,bound"));
    let sidecar = read_json(&dir.path().join("fig1.json"));
    assert_eq!(sidecar["config"]["id"], 1);
    assert_eq!(sidecar["metadata"]["experiment"], "figure1");
    assert!(sidecar["metadata"]["c_max"].as_f64().unwrap() > 0.0);
}

#[test]
fn sidecar_reproduces_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let first = videstep(
        &["figure", "--id", "4", "--h", "0.01", "--out", "a.csv"],
        dir.path(),
    );
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    let second = videstep(
        &["figure", "--config", "a.json", "--out", "b.csv"],
        dir.path(),
    );
    assert_eq!(code(&second), 0, "{}", stderr(&second));
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "xf = 1.0\nh = 0.1\nmethod = \"implicit\"\n",
    )
    .unwrap();
    let out = videstep(
        &[
            "solve", "--config", "run.toml", "--h", "0.05", "--out", "s.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(csv.lines().count(), 22);
    let config = &read_json(&dir.path().join("s.json"))["config"];
    assert_eq!(config["h"], 0.05);
    assert_eq!(config["method"], "implicit");
}

#[test]
fn config_for_another_command_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&videstep(
            &["figure", "--id", "5", "--out", "f.csv"],
            dir.path()
        )),
        0
    );
    assert_eq!(
        code(&videstep(&["solve", "--config", "f.json"], dir.path())),
        2
    );
}

#[test]
fn divergence_needs_explicit_permission() {
    let dir = tempfile::tempdir().unwrap();
    let out = videstep(&["figure", "--id", "2", "--out", "fig2.csv"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("--allow-divergence"));
    // the table is still written so the blow-up can be inspected
    assert_eq!(
        fs::read_to_string(dir.path().join("fig2.csv"))
            .unwrap()
            .lines()
            .count(),
        42
    );
    let out = videstep(
        &[
            "figure",
            "--id",
            "2",
            "--out",
            "fig2.csv",
            "--allow-divergence",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    assert_eq!(
        read_json(&dir.path().join("fig2.json"))["metadata"]["diverged"],
        true
    );
}

#[test]
fn solver_failure_reports_step_and_residual() {
    let dir = tempfile::tempdir().unwrap();
    let out = videstep(
        &[
            "solve",
            "--problem",
            "cubic-kernel",
            "--xf",
            "1",
            "--h",
            "0.1",
            "--method",
            "implicit",
            "--max-iterations",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 3);
    let err = stderr(&out);
    assert!(err.contains("step 0") && err.contains("residual"), "{err}");
}

#[test]
fn out_dir_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_videstep"))
        .args(["order", "--method", "implicit"])
        .env("VIDESTEP_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("order.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("h,delta,delta_abs,order"));
    assert!(dir.path().join("order.json").exists());
}

#[test]
fn json_format_carries_columns_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = videstep(
        &[
            "local",
            "--problem",
            "cubic-kernel",
            "--xf",
            "1",
            "--h",
            "0.05",
            "--out",
            "local.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = read_json(&dir.path().join("local.json"));
    assert_eq!(doc["columns"]["epsilon"].as_array().unwrap().len(), 21);
    assert_eq!(doc["metadata"]["error_source"], "against-reference-run");
    assert_eq!(doc["config"]["problem"], "cubic-kernel");
    // no exact solution, so no direct local errors
    assert!(doc["columns"].get("epsilon_direct").is_none());
}

#[test]
fn every_command_runs() {
    let dir = tempfile::tempdir().unwrap();
    for command in ["solve", "errors", "bound", "order", "local", "consistency"] {
        let out = videstep(
            &[command, "--xf", "2", "--h", "0.01", "--h-list", "0.04,0.02"],
            dir.path(),
        );
        assert_eq!(code(&out), 0, "{command}: {}", stderr(&out));
        assert!(!out.stdout.is_empty());
    }
    for id in ["1", "3", "4", "5"] {
        assert_eq!(code(&videstep(&["figure", "--id", id], dir.path())), 0);
    }
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = videstep(&["--help"], dir.path());
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("figure"));
}
