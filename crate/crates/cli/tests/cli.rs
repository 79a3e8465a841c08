use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn adacons(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adacons")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn consensus_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = adacons(&[
        "consensus", "--nodes", "10", "--edge-prob", "0.5", "--kappa", "0.5", "--tau", "5", "--tol", "1e-8",
        "--dim", "2", "--out", path(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), "k,comm_volume,comm_rounds,consensus_error,optimality_error,spectral_gap,status");
    assert!(trace.trim_end().ends_with(",converged"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "converged");
}

#[test]
fn runs_are_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = adacons(&["consensus", "--nodes", "8", "--kappa", "0.6", "--tau", "3", "--seed", "7", "--out", path(d.path())]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(
        fs::read(a.path().join("trace.csv")).unwrap(),
        fs::read(b.path().join("trace.csv")).unwrap()
    );
}

#[test]
fn optimize_linreg_converges() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"scenario": "linreg", "graph": {"n": 8, "p": 0.6},
            "problem": {"samples": 160, "dim": 3}, "max_iters": 3000}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = adacons(&[
        "optimize", "--config", path(&cfg), "--problem", "linreg", "--alpha", "0.05", "--kappa", "0.5",
        "--tol", "1e-8", "--out", path(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(out.join("trace.csv")).unwrap().trim_end().ends_with(",converged"));
}

#[test]
fn optimize_reads_csv_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let mut text = String::from("a,b,y\n");
    for i in 0..40 {
        let (a, b) = ((i as f64 * 0.37).sin(), (i as f64 * 0.91).cos());
        text += &format!("{a},{b},{}\n", u8::from(a + 0.5 * b > 0.0));
    }
    fs::write(&data, text).unwrap();
    let o = adacons(&[
        "optimize", "--problem", "logreg", "--data", path(&data), "--label-col", "y", "--nodes", "4",
        "--edge-prob", "0.8", "--alpha", "0.5", "--max-iters", "50", "--out", path(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = adacons(&["optimize", "--problem", "logreg", "--data", path(&data), "--label-col", "nope", "--nodes", "4"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn sweep_writes_summary_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"scenario": "consensus", "graph": {"n": 10, "p": 0.5}, "kappa": [0.0, 0.5],
            "tau": [5], "trials": 2, "dim": 2, "tolerance": 1e-8, "output": "ignored"}"#,
    )
    .unwrap();
    let out = dir.path().join("sweep");
    let o = adacons(&["sweep", "--config", path(&cfg), "--out", path(&out), "--jobs", "2", "--traces"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert_eq!(fs::read_dir(out.join("traces")).unwrap().count(), 4);
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn analyze_checks() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "--nodes", "12", "--edge-prob", "0.5", "--kappa", "0.5", "--tau", "5", "--refresh-period", "1",
        "--max-iters", "60", "--tol", "0",
    ];
    for (check, file) in [("envelope", "envelope.json"), ("rho-prime", "rho_prime.json"), ("step-size", "step_size.json")] {
        let mut args = vec!["analyze", "--check", check, "--out", path(dir.path())];
        args.extend(base);
        let o = adacons(&args);
        assert_eq!(code(&o), 0, "{check}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(dir.path().join(file).exists());
    }
    let env: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("envelope.json")).unwrap()).unwrap();
    assert_eq!(env["pass"], true);
    assert!(fs::read_to_string(dir.path().join("envelope.csv")).unwrap().starts_with("k,actual,bound,margin"));
}

#[test]
fn budget_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = adacons(&[
        "budget", "--nodes", "16", "--edge-prob", "0.8", "--kappa", "0.5", "--bits", "2000000", "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("budget.json")).unwrap()).unwrap();
    assert!(rep["pruned_iterations"].as_u64() >= rep["iterations"].as_u64());
}

#[test]
fn exit_codes() {
    assert_eq!(code(&adacons(&["consensus", "--kappa", "1.5"])), 1);
    assert_eq!(code(&adacons(&["sweep"])), 1);
    assert_eq!(code(&adacons(&["consensus", "--config", "/nonexistent.json"])), 1);
    assert_eq!(code(&adacons(&["bogus"])), 1);
    assert_eq!(code(&adacons(&["--help"])), 0);
    let dir = tempfile::tempdir().unwrap();
    let o = adacons(&["consensus", "--nodes", "10", "--edge-prob", "0.0", "--out", path(dir.path())]);
    assert_eq!(code(&o), 2);
    let o = adacons(&[
        "optimize", "--nodes", "6", "--alpha", "50", "--max-iters", "200", "--out", path(dir.path()),
    ]);
    assert_eq!(code(&o), 2);
}
