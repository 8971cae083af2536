//! End-to-end runs of the `ovqe` binary.

use std::path::Path;
use std::process::{Command, Output};

const SMALL_SWEEP: &str = r#"
name = "small"
p_grid = [4, 8]
trials_per_p = 4
eta_c = 1e-2
max_steps = 3000
base_seed = 11

[problem]
kind = "synthetic"
d = 8
d_eff = 4
kappa_eff = 2.0
"#;

fn ovqe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ovqe"))
        .args(args)
        .arg("--quiet")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

#[test]
fn verify_passes_and_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = path(tmp.path(), "verify");
    let o = ovqe(&["verify", "--out", &out]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("verify/verify.json")).unwrap(),
    )
    .unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.len() >= 9);
    assert!(checks.iter().all(|c| c["failed"] == 0));
    assert!(tmp.path().join("verify/manifest.json").exists());
}

#[test]
fn threshold_output_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.toml", SMALL_SWEEP);
    let (a, b) = (path(tmp.path(), "a"), path(tmp.path(), "b"));
    assert_eq!(
        ovqe(&["threshold", "--config", &cfg, "--out", &a])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        ovqe(&["threshold", "--config", &cfg, "--out", &b, "--workers", "1"])
            .status
            .code(),
        Some(0)
    );
    for f in ["thresholds.csv", "trials.csv", "summary.json"] {
        let x = std::fs::read(tmp.path().join("a").join(f)).unwrap();
        let y = std::fs::read(tmp.path().join("b").join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between runs");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("a/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "threshold");
    assert_eq!(manifest["config"]["base_seed"], 11);

    // The written config re-runs to the same results.
    let again = path(tmp.path(), "c");
    let written = path(tmp.path(), "a/config.toml");
    assert_eq!(
        ovqe(&["threshold", "--config", &written, "--out", &again])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        std::fs::read(tmp.path().join("a/trials.csv")).unwrap(),
        std::fs::read(tmp.path().join("c/trials.csv")).unwrap()
    );
}

#[test]
fn seed_override_changes_trials() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.toml", SMALL_SWEEP);
    let (a, b) = (path(tmp.path(), "a"), path(tmp.path(), "b"));
    assert_eq!(
        ovqe(&["threshold", "--config", &cfg, "--out", &a])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        ovqe(&["threshold", "--config", &cfg, "--out", &b, "--seed", "12"])
            .status
            .code(),
        Some(0)
    );
    assert_ne!(
        std::fs::read(tmp.path().join("a/trials.csv")).unwrap(),
        std::fs::read(tmp.path().join("b/trials.csv")).unwrap()
    );
}

#[test]
fn train_writes_trace_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.toml", SMALL_SWEEP);
    let out = path(tmp.path(), "run");
    let o = ovqe(&[
        "train", "--config", &cfg, "--out", &out, "--p", "8", "--trial", "2",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let trace = std::fs::read_to_string(tmp.path().join("run/trace.csv")).unwrap();
    assert!(trace.starts_with("step,loss,overlap_error,dtheta_inf,dtheta_2,dy_op"));
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("run/summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["p"], 8);
    assert_eq!(summary["trial"], 2);
}

#[test]
fn effective_reports_tfi_dimension() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "eff.toml",
        r#"
        model = { model = "tfi1d", n = 4, g = 0.3 }
        generators = { set = "tfi2", n = 4 }
        dump_basis = true
        "#,
    );
    let out = path(tmp.path(), "eff");
    let o = ovqe(&["effective", "--config", &cfg, "--out", &out]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let profile: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("eff/profile.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(profile["d_eff"], 4);
    let basis = std::fs::metadata(tmp.path().join("eff/basis_q.bin")).unwrap();
    assert_eq!(basis.len(), 16 * 4 * 16);
}

#[test]
fn kappa_scan_writes_one_row_per_point() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "scan.toml",
        r#"
        model = { model = "xxz1d", n = 4, j_zz = 0.0 }
        generators = { set = "xxz4", n = 4 }
        grid = { values = [-0.9, 0.0, 0.5] }
        "#,
    );
    let out = path(tmp.path(), "scan");
    assert_eq!(
        ovqe(&["kappa-scan", "--config", &cfg, "--out", &out])
            .status
            .code(),
        Some(0)
    );
    let csv = std::fs::read_to_string(tmp.path().join("scan/kappa_scan.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "param,kappa,kappa_eff,d_eff,degenerate_flag");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("-0.9,"));
}

#[test]
fn config_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = path(tmp.path(), "x");
    assert_eq!(ovqe(&["threshold", "--out", &out]).status.code(), Some(1));
    assert_eq!(
        ovqe(&[
            "threshold",
            "--config",
            "/definitely/missing.toml",
            "--out",
            &out
        ])
        .status
        .code(),
        Some(1)
    );
    let bad = write(
        tmp.path(),
        "bad.toml",
        &format!("unknown_key = 3\n{SMALL_SWEEP}"),
    );
    let o = ovqe(&["threshold", "--config", &bad, "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
    let report = String::from_utf8_lossy(&o.stderr);
    assert!(report.contains("\"error\":\"config\""), "{report}");

    let unsorted = write(
        tmp.path(),
        "unsorted.toml",
        &SMALL_SWEEP.replace("[4, 8]", "[8, 4]"),
    );
    assert_eq!(
        ovqe(&["deviation", "--config", &unsorted, "--out", &out])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(ovqe(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn dimension_guard_is_a_runtime_abort() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "big.toml",
        r#"
        p_grid = [4]
        [problem]
        kind = "hamiltonian"
        model = { model = "tfi1d", n = 13, g = 1.0 }
        generators = { set = "tfi2", n = 13 }
        "#,
    );
    let out = path(tmp.path(), "big");
    let o = ovqe(&["train", "--config", &cfg, "--out", &out]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}
