use std::path::Path;

use serde::Serialize;

use super::config::SweepConfig;
use super::sweeps::{ComparisonRow, DeviationTable, ThresholdResult};
use crate::error::Result;

/// Version string recorded in manifests.
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a, T: Serialize> {
    pub command: &'a str,
    pub code_version: &'a str,
    pub config: &'a T,
    pub outputs: Vec<String>,
}

/// Writes `manifest.json` describing how to regenerate the directory.
pub fn write_manifest<T: Serialize>(
    dir: &Path,
    command: &str,
    config: &T,
    outputs: &[&str],
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let manifest = Manifest {
        command,
        code_version: CODE_VERSION,
        config,
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    };
    let f = std::fs::File::create(dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(f, &manifest)?;
    Ok(())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// `thresholds.csv` (per `p`) and `trials.csv` (per trial).
pub fn write_threshold(dir: &Path, res: &ThresholdResult) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("thresholds.csv"))?;
    w.write_record(["p", "trials", "successes", "rate", "meets_bar"])?;
    for s in &res.points {
        w.write_record([
            s.p.to_string(),
            s.trials.to_string(),
            s.successes.to_string(),
            s.rate.to_string(),
            (s.rate >= res.success_rate_bar - 1e-12).to_string(),
        ])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("trials.csv"))?;
    for s in &res.points {
        for r in &s.records {
            w.serialize(r)?;
        }
    }
    w.flush()?;
    let f = std::fs::File::create(dir.join("summary.json"))?;
    serde_json::to_writer_pretty(
        f,
        &serde_json::json!({
            "label": res.label,
            "threshold_p": res.threshold_p,
            "success_rate_bar": res.success_rate_bar,
            "monotonicity_violations": res.monotonicity_violations,
        }),
    )?;
    Ok(())
}

/// `deviation.csv`, `deviation_trials.csv` and `fits.json`.
pub fn write_deviation(dir: &Path, table: &DeviationTable) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("deviation.csv"))?;
    for r in &table.rows {
        w.serialize(r)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("deviation_trials.csv"))?;
    w.write_record([
        "p",
        "trial",
        "seed",
        "max_dy_op",
        "max_dtheta_inf",
        "final_overlap_error",
    ])?;
    for t in &table.trials {
        w.write_record([
            t.p.to_string(),
            t.trial.to_string(),
            t.seed.to_string(),
            fmt_opt(t.max_dy_op),
            t.max_dtheta_inf.to_string(),
            t.final_overlap_error.to_string(),
        ])?;
    }
    w.flush()?;
    let f = std::fs::File::create(dir.join("fits.json"))?;
    serde_json::to_writer_pretty(f, &table.fits)?;
    Ok(())
}

/// `comparison.csv` with one row per variant.
pub fn write_comparison(dir: &Path, rows: &[ComparisonRow]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("comparison.csv"))?;
    w.write_record(["label", "threshold_p", "d_eff", "kappa_eff", "compatible"])?;
    for r in rows {
        let (d_eff, k_eff, comp) = match &r.profile {
            Some(p) => (
                p.d_eff.to_string(),
                if p.kappa_eff.is_infinite() {
                    "inf".to_string()
                } else {
                    p.kappa_eff.to_string()
                },
                p.compatible.to_string(),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        w.write_record([
            r.label.clone(),
            r.threshold_p.map(|p| p.to_string()).unwrap_or_default(),
            d_eff,
            k_eff,
            comp,
        ])?;
    }
    w.flush()?;
    let f = std::fs::File::create(dir.join("comparison.json"))?;
    serde_json::to_writer_pretty(f, rows)?;
    Ok(())
}

/// Writes the configuration next to its results as TOML.
pub fn write_config(dir: &Path, cfg: &SweepConfig) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml_string()?)?;
    Ok(())
}
