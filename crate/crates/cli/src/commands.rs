//! One function per subcommand. Each writes its data files and a
//! `manifest.json` into the output directory and returns a short summary
//! line for the progress log.

use std::fs::File;
use std::path::Path;

use log::info;
use serde::Serialize;
use vqe_core::dynamics::RecordingPolicy;
use vqe_core::effective::{effective_profile, kappa_scan, write_kappa_csv};
use vqe_core::experiments::{
    deviation_sweep, threshold_sweep, write_config, write_deviation, write_manifest,
    write_threshold, write_trial_traces, SweepConfig, SweepContext,
};
use vqe_core::hamiltonians::GeneratorSet;
use vqe_core::verify::{run_property_suite, VerifyReport};
use vqe_core::{Error, Result};

use crate::configs::{with_param, EffectiveConfig, KappaScanConfig};

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(File::create(path)?, value)?;
    Ok(())
}

fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = toml::to_string(value).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct TrainSummary {
    label: String,
    p: usize,
    trial: usize,
    seed: u64,
    eta: f64,
    termination: vqe_core::dynamics::Termination,
    final_loss: f64,
    final_overlap_error: f64,
    max_dtheta_inf: f64,
    max_dy_op: Option<f64>,
    final_theta: Vec<f64>,
}

/// Trains trial `trial` at `p` (default: the first grid point).
pub fn train(cfg: &SweepConfig, out: &Path, p: Option<usize>, trial: usize) -> Result<String> {
    let p = p.unwrap_or(cfg.p_grid[0]);
    let ctx = SweepContext::new(cfg)?;
    info!("training {} at p = {p}, trial {trial}", cfg.problem.label());
    let policy = if cfg.skip_y {
        RecordingPolicy::every(10)
    } else {
        RecordingPolicy::every(10).with_y(cfg.y_stride)
    };
    let trace = ctx.run_trial(p, trial, policy, true)?;
    std::fs::create_dir_all(out)?;
    trace.save_csv(&out.join("trace.csv"))?;
    write_json(
        &out.join("summary.json"),
        &TrainSummary {
            label: cfg.problem.label(),
            p,
            trial,
            seed: ctx.trial_seed(p, trial),
            eta: cfg.eta(p),
            termination: trace.termination.clone(),
            final_loss: trace.final_loss,
            final_overlap_error: trace.final_overlap_error,
            max_dtheta_inf: trace.max_dtheta_inf,
            max_dy_op: trace.max_dy_op,
            final_theta: trace.final_theta.clone(),
        },
    )?;
    write_config(out, cfg)?;
    let command = format!("train --p {p} --trial {trial}");
    write_manifest(
        out,
        &command,
        cfg,
        &["trace.csv", "summary.json", "config.toml"],
    )?;
    Ok(format!(
        "{:?}, final overlap error {:.3e}",
        trace.termination, trace.final_overlap_error
    ))
}

pub fn deviation(cfg: &SweepConfig, out: &Path) -> Result<String> {
    let ctx = SweepContext::new(cfg)?;
    info!(
        "deviation sweep {} over p = {:?}, {} trials each",
        cfg.problem.label(),
        cfg.p_grid,
        cfg.trials_per_p
    );
    let table = deviation_sweep(&ctx)?;
    write_deviation(out, &table)?;
    write_config(out, cfg)?;
    let mut outputs = vec![
        "deviation.csv",
        "deviation_trials.csv",
        "fits.json",
        "config.toml",
    ];
    if cfg.write_traces {
        write_trial_traces(&ctx, out, !cfg.skip_y)?;
        outputs.push("traces/");
    }
    write_manifest(out, "deviation", cfg, &outputs)?;
    let f = &table.fits;
    Ok(format!(
        "Y slope {:?}, under 50/√p envelope: {}, under 1/p envelope: {}",
        f.y_slope, f.under_y_envelope, f.under_theta_envelope
    ))
}

pub fn threshold(cfg: &SweepConfig, out: &Path) -> Result<String> {
    let ctx = SweepContext::new(cfg)?;
    info!(
        "threshold sweep {} over p = {:?}, {} trials each",
        cfg.problem.label(),
        cfg.p_grid,
        cfg.trials_per_p
    );
    let res = threshold_sweep(&ctx);
    write_threshold(out, &res)?;
    write_config(out, cfg)?;
    let mut outputs = vec![
        "thresholds.csv",
        "trials.csv",
        "summary.json",
        "config.toml",
    ];
    if cfg.write_traces {
        write_trial_traces(&ctx, out, false)?;
        outputs.push("traces/");
    }
    write_manifest(out, "threshold", cfg, &outputs)?;
    for s in &res.points {
        info!("p = {:>4}: success rate {:.3}", s.p, s.rate);
    }
    Ok(match res.threshold_p {
        Some(p) => format!("threshold p = {p}"),
        None => "no grid point reached the success-rate bar".into(),
    })
}

pub fn effective(cfg: &EffectiveConfig, out: &Path) -> Result<String> {
    cfg.validate()?;
    let m = cfg.model.build()?;
    let gens = GeneratorSet::from_spec(&cfg.generators)?.with_universal(cfg.estimation.universal);
    let phi = cfg.input_state().build(cfg.model.n_qubits())?;
    info!(
        "estimating the invariant subspace of {} with R = {}",
        cfg.generators.name(),
        cfg.estimation.r_samples
    );
    let profile = effective_profile(&m, &gens, &phi, &cfg.estimation.profile_options())?;
    profile.save(out, cfg.dump_basis)?;
    write_toml(&out.join("config.toml"), cfg)?;
    let mut outputs = vec!["profile.json", "config.toml"];
    if cfg.dump_basis {
        outputs.push("basis_q.bin");
    }
    write_manifest(out, "effective", cfg, &outputs)?;
    Ok(format!(
        "d_eff = {}, kappa = {:.4}, kappa_eff = {:.4}, compatible = {}",
        profile.d_eff,
        profile.kappa,
        profile.kappa_eff(),
        profile.compatibility.compatible
    ))
}

pub fn kappa_scan_cmd(cfg: &KappaScanConfig, out: &Path) -> Result<String> {
    cfg.validate()?;
    let grid = cfg.grid.points()?;
    let gens = GeneratorSet::from_spec(&cfg.generators)?.with_universal(cfg.estimation.universal);
    let m0 = cfg.model.build()?;
    let phi = cfg.input_state().build(cfg.model.n_qubits())?;
    let profile = effective_profile(&m0, &gens, &phi, &cfg.estimation.profile_options())?;
    info!("subspace estimated once: d_eff = {}", profile.d_eff);
    let rows = kappa_scan(
        &grid,
        |x| with_param(&cfg.model, x)?.build(),
        &profile.basis_q,
    )?;
    std::fs::create_dir_all(out)?;
    write_kappa_csv(&rows, File::create(out.join("kappa_scan.csv"))?)?;
    write_toml(&out.join("config.toml"), cfg)?;
    write_manifest(out, "kappa-scan", cfg, &["kappa_scan.csv", "config.toml"])?;
    let worst = rows.iter().map(|r| r.kappa).fold(0.0, f64::max);
    Ok(format!(
        "{} points, d_eff = {}, largest kappa = {worst:.4}",
        rows.len(),
        profile.d_eff
    ))
}

/// Runs the property suite; the report is written even when checks fail.
pub fn verify(seed: u64, out: Option<&Path>) -> Result<VerifyReport> {
    let report = run_property_suite(seed)?;
    for c in &report.checks {
        let status = if c.ok() { "pass" } else { "FAIL" };
        info!(
            "{status} {:<28} {:>5} passed {:>3} failed  worst {:.3e}  ({})",
            c.name, c.passed, c.failed, c.worst, c.detail
        );
    }
    for f in &report.rate_fits {
        info!(
            "reference flow d = {:>2}: fitted rate {:?}, 2·gap = {:.4}",
            f.dim,
            f.fitted_rate,
            2.0 * f.gap
        );
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join("verify.json"), &report)?;
        write_manifest(
            dir,
            "verify",
            &serde_json::json!({ "seed": seed }),
            &["verify.json"],
        )?;
    }
    Ok(report)
}
