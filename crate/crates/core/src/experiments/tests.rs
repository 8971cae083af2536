use super::*;
use crate::exec::Execution;

fn synthetic(d: usize, d_eff: usize, kappa: f64, grid: Vec<usize>, trials: usize) -> SweepConfig {
    let mut cfg = SweepConfig::new(
        ProblemSpec::Synthetic {
            d,
            d_eff,
            kappa_eff: kappa,
        },
        grid,
    );
    cfg.trials_per_p = trials;
    cfg.base_seed = 17;
    cfg
}

#[test]
fn synthetic_success_grows_with_p() {
    let mut cfg = synthetic(8, 2, 2.0, vec![1, 12], 8);
    cfg.max_steps = 3000;
    let ctx = SweepContext::new(&cfg).unwrap();
    let res = threshold_sweep(&ctx);
    assert!(res.rate_at(12).unwrap() >= res.rate_at(1).unwrap());
    assert_eq!(res.rate_at(12), Some(1.0));
    for s in &res.points {
        let recount = s.records.iter().filter(|r| r.success).count();
        assert_eq!(recount, s.successes);
    }
}

#[test]
fn sweep_is_deterministic_across_strategies() {
    let mut cfg = synthetic(4, 2, 2.0, vec![2, 4], 4);
    cfg.max_steps = 500;
    cfg.execution = Execution::Sequential;
    let a = threshold_sweep(&SweepContext::new(&cfg).unwrap());
    cfg.execution = Execution::Parallel;
    let b = crate::exec::with_workers(3, || threshold_sweep(&SweepContext::new(&cfg).unwrap()));
    assert_eq!(a, b);
}

#[test]
fn single_trial_is_reproducible() {
    let mut cfg = synthetic(4, 3, 2.0, vec![3], 1);
    cfg.max_steps = 200;
    let ctx = SweepContext::new(&cfg).unwrap();
    assert_eq!(success_rate(&ctx, 3), success_rate(&ctx, 3));
}

#[test]
fn deviation_sweep_on_small_hva() {
    let text = r#"
p_grid = [4, 8]
trials_per_p = 2
max_steps = 50
eta_c = 1e-4
y_stride = 10

[problem]
kind = "hamiltonian"
model = { model = "tfi1d", n = 2, g = 0.3 }
generators = { set = "tfi2", n = 2 }
"#;
    let cfg = SweepConfig::from_toml_str(text).unwrap();
    let table = deviation_sweep(&SweepContext::new(&cfg).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 2);
    assert_eq!(table.trials.len(), 4);
    assert!(table
        .rows
        .iter()
        .all(|r| r.mean_dy >= 0.0 && r.mean_dtheta > 0.0));
    assert!(table.fits.y_slope.is_some());
    assert_eq!(table.fits.reference_y, 50.0);
}

#[test]
fn fully_trainable_requires_multiple_of_k() {
    let text = r#"
p_grid = [3]
trials_per_p = 1
mode = "fully_trainable"

[problem]
kind = "hamiltonian"
model = { model = "tfi1d", n = 2, g = 0.3 }
generators = { set = "tfi2", n = 2 }
"#;
    let cfg = SweepConfig::from_toml_str(text).unwrap();
    let res = threshold_sweep(&SweepContext::new(&cfg).unwrap());
    assert!(res.points[0].records[0].status.starts_with("aborted"));
    assert!(!res.points[0].records[0].success);
}

#[test]
fn outputs_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = synthetic(4, 2, 2.0, vec![2], 2);
    cfg.max_steps = 100;
    let res = threshold_sweep(&SweepContext::new(&cfg).unwrap());
    write_threshold(dir.path(), &res).unwrap();
    write_manifest(dir.path(), "threshold", &cfg, &["thresholds.csv"]).unwrap();
    let text = std::fs::read_to_string(dir.path().join("thresholds.csv")).unwrap();
    assert!(text.starts_with("p,trials,successes,rate,meets_bar\n2,2,"));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "threshold");
    assert_eq!(manifest["config"]["p_grid"][0], 2);
}
