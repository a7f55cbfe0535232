use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qmsp_core::{fixtures, parse_machine};

fn qmsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmsp"))
        .args(args)
        .env_remove("QMSP_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_reports_stationary_and_unifilarity() {
    let o = qmsp(&["validate", "--machine", "fig2a"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("unifilar, π=(0.500000, 0.250000, 0.250000)"));

    let o = qmsp(&["validate", "--machine", "fig2c"]);
    assert!(stdout(&o).contains("nonunifilar"));
}

#[test]
fn validate_rejects_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    fs::write(&path, "").unwrap();
    let o = qmsp(&["validate", "--machine", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn unknown_machine_is_a_usage_error() {
    let o = qmsp(&["validate", "--machine", "no_such_machine"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn measuring_fig2b_at_half_pi_gives_fig2c() {
    let o = qmsp(&["measure", "--machine", "fig2b", "--theta", "pi/2"]);
    assert!(o.status.success());
    let measured = parse_machine(&stdout(&o)).unwrap();
    let reference = fixtures::fig2c();
    for x in 0..2 {
        let d = (measured.machine().matrix(x) - reference.matrix(x)).abs().max();
        assert!(d < 1e-12, "{d}");
    }
}

#[test]
fn measure_writes_file_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = qmsp(&["measure", "--machine", "fig2b", "--theta", "pi/4", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let m = parse_machine(&fs::read_to_string(dir.path().join("measured.json")).unwrap()).unwrap();
    let m = m.machine();
    // identical outcome distribution from every state
    let p0: Vec<f64> = (0..3).map(|i| m.matrix(0).row(i).sum()).collect();
    assert!(p0.iter().all(|p| (p - p0[0]).abs() < 1e-12));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "measure");
    assert!(manifest["version"].is_string());
}

#[test]
fn exact_on_generator() {
    let o = qmsp(&["exact", "--machine", "fig2a"]);
    let s = stdout(&o);
    assert!(s.contains("hmu = 0.750000000000"));
    assert!(s.contains("Cmu = 1.500000000000"));
    let o = qmsp(&["exact", "--machine", "fig2c"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn entropy_of_golden_mean() {
    let o = qmsp(&["entropy", "--machine", "golden_mean", "--seed", "5"]);
    let s = stdout(&o);
    let value: f64 = s
        .split_whitespace()
        .nth(2)
        .and_then(|v| v.parse().ok())
        .expect("estimate printed");
    assert!((value - 2.0 / 3.0).abs() < 0.001, "{s}");
}

#[test]
fn msp_budget_exit_code() {
    let o = qmsp(&["msp", "--machine", "fig2b", "--theta", "pi/2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("budget exceeded"));
    let o = qmsp(&["msp", "--machine", "fig2b", "--theta", "0"]);
    assert_eq!(o.status.code(), Some(0));
}

fn sweep(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "sweep", "--machine", "fig2b", "--grid", "0:pi:7", "--length", "20000", "--seed", "9",
        "--max-states", "300", "--out", dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    qmsp(&args)
}

#[test]
fn sweep_is_byte_identical_across_runs_and_workers() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    assert!(sweep(a.path(), &["--workers", "1"]).status.success());
    assert!(sweep(b.path(), &["--workers", "1"]).status.success());
    assert!(sweep(c.path(), &["--workers", "3"]).status.success());
    let read = |d: &Path, f: &str| fs::read(d.join(f)).unwrap();
    assert_eq!(read(a.path(), "sweep.csv"), read(b.path(), "sweep.csv"));
    assert_eq!(read(a.path(), "sweep.csv"), read(c.path(), "sweep.csv"));
    assert_eq!(read(a.path(), "manifest.json"), read(c.path(), "manifest.json"));

    let csv = String::from_utf8(read(a.path(), "sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "index,theta,phi,hmu_B,hmu_stderr,lambda_1,lambda_2,k,d_lce,msp_states,cmu_exact_msp,d_bc,status"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r[12] == "ok"));
    // theta = 0 closes, theta = pi/2 does not
    assert!(rows[0][9].parse::<i64>().unwrap() > 0);
    assert!(!rows[0][10].is_empty());
    assert_eq!(rows[3][9], "-1");
    assert!(rows[3][10].is_empty());
}

#[test]
fn sweep_seed_falls_back_to_environment() {
    let run = |seed: &str| {
        let dir = tempfile::tempdir().unwrap();
        let o = Command::new(env!("CARGO_BIN_EXE_qmsp"))
            .args(["sweep", "--machine", "fig2b", "--thetas", "1.0", "--length", "5000", "--no-msp"])
            .args(["--out", dir.path().to_str().unwrap()])
            .env("QMSP_SEED", seed)
            .output()
            .unwrap();
        assert!(o.status.success());
        fs::read_to_string(dir.path().join("sweep.csv")).unwrap()
    };
    assert_eq!(run("4"), run("4"));
    assert_ne!(run("4"), run("5"));
}

#[test]
fn sweep_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = sweep(dir.path(), &["--clouds", "--svg", "--bc", "--decimate", "2", "--no-msp"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["sweep.csv", "hmu_vs_theta.svg", "cloud_0.csv", "cloud_6.svg", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let cloud = fs::read_to_string(dir.path().join("cloud_3.csv")).unwrap();
    assert!(cloud.starts_with("p_1,p_2,p_3,x2d,y2d\n"));
    assert_eq!(cloud.lines().count(), 1 + 10_000);
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| !l.split(',').nth(11).unwrap().is_empty()));
}

#[test]
fn dimension_text_block() {
    let dir = tempfile::tempdir().unwrap();
    let o = qmsp(&[
        "dimension", "--machine", "fig2b", "--theta", "0.628", "--length", "100000", "--bc", "--clouds",
        "--svg", "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let s = stdout(&o);
    for key in ["hmu_B", "lambda", "d_lce", "d_bc", "open set"] {
        assert!(s.contains(key), "{key} missing in {s}");
    }
    assert!(dir.path().join("cloud_0.svg").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn bad_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = qmsp(&["sweep", "--machine", "fig2b", "--grid", "0:pi", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
