use std::process::{Command, Output};

use serde_json::Value;

fn p3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_p3")).args(args).output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
    })
}

#[test]
fn exit_codes_follow_the_outcome() {
    assert_eq!(p3(&["verify", "--catalog", "may-leonard-g2"]).status.code(), Some(0));
    let bad = p3(&["verify", "-u", "x1*x2", "-v", "1", "-w", "1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(json(&bad)["result"]["jacobi"]["verdict"], "fail");
    assert_eq!(p3(&["casimir", "--catalog", "known-first-integral-g2"]).status.code(), Some(1));
    assert_eq!(p3(&["verify", "-u", "x1 +", "-v", "1", "-w", "1"]).status.code(), Some(2));
    assert_eq!(p3(&["verify", "--catalog", "euler-top", "--params", "nope=1"]).status.code(), Some(2));
    assert_eq!(p3(&["integrate", "--catalog", "two-level"]).status.code(), Some(2));
    assert_eq!(p3(&["--version"]).status.code(), Some(0));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for args in [
        &["verify", "--catalog", "rabinovich-3", "--seed", "7"][..],
        &["casimir", "--catalog", "lorenz-g4"],
        &["darboux", "--catalog", "spin-system"],
        &["integrate", "--catalog", "euler-top", "--t-end", "1"],
    ] {
        let (a, b) = (p3(args), p3(args));
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let a = json(&p3(&["verify", "--catalog", "rabinovich-3", "--seed", "7"]));
    let b = json(&p3(&["verify", "--catalog", "rabinovich-3", "--seed", "8"]));
    assert_ne!(a["result"]["jacobi"]["argmax_point"], b["result"]["jacobi"]["argmax_point"]);
    assert_eq!(a["config"]["seed"], 7);
}

#[test]
fn classify_names_the_family() {
    let o = json(&p3(&["classify", "--catalog", "so3-spherical"]));
    assert_eq!(o["result"]["tag"], "gamma-singleton(w)");
    let o = json(&p3(&["classify", "-u", "x3", "-v", "x2", "-w", "x1"]));
    assert_eq!(o["command"], "classify");
    assert!(o["result"]["tag"].as_str().unwrap().starts_with("delta"));
}

#[test]
fn darboux_writes_the_chart() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chart.json");
    let o = p3(&["darboux", "--catalog", "two-level", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let chart: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(chart, json(&o)["result"]["chart"]);
    assert!(chart["mu_hat"].is_string());
    let alt = json(&p3(&["darboux", "--catalog", "two-level", "--alternate"]));
    assert_ne!(alt["result"]["chart"]["mu_hat"], chart["mu_hat"]);
}

#[test]
fn integrate_emits_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    let o = p3(&[
        "integrate", "-u", "x3", "-v", "x2", "-w", "x1", "--domain=-2,2",
        "--hamiltonian", "x1^2/2 + x2^2/4 + x3^2/6", "--x0", "1,0.5,-0.3",
        "--t-end", "1", "--step", "0.01", "--stride", "10", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&o);
    assert_eq!(report["result"]["status"], "completed");
    assert_eq!(report["result"]["rows"], 101);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,x3,H,C"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0][..4], [0.0, 1.0, 0.5, -0.3]);
    assert!((rows[10][0] - 1.0).abs() < 1e-12);
    for r in &rows {
        assert!((r[4] - rows[0][4]).abs() < 1e-10);
        // no factors are known for inline delta input, so no Casimir column
        assert!(r[5].is_nan());
    }
    let stdout = p3(&["integrate", "--catalog", "euler-top", "--t-end", "0.1", "--format", "csv"]);
    assert_eq!(stdout.status.code(), Some(0));
    let text = String::from_utf8(stdout.stdout).unwrap();
    assert!(text.starts_with("t,x1,x2,x3,H,C\n"));
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(last.len(), 6);
}

#[test]
fn superpose_and_catalog_export() {
    let o = p3(&["superpose", "--op", "oplus", "--catalog", "may-leonard-g2", "--catalog", "rabinovich-6"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["result"]["tag"], "gamma-pair(u)");
    let mixed = p3(&["superpose", "--op", "oplus", "--catalog", "may-leonard-g2", "--catalog", "two-level"]);
    assert_eq!(mixed.status.code(), Some(2));
    let exported: Value = serde_json::from_slice(&p3(&["catalog", "export"]).stdout).unwrap();
    let listed = json(&p3(&["catalog", "list"]));
    assert_eq!(
        exported["entries"].as_array().unwrap().len(),
        listed["result"]["entries"].as_array().unwrap().len()
    );
}
