//! `ovqe`: experiment driver for over-parameterized VQE simulations.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime abort,
//! 3 property-suite failure. Progress goes to standard error; data goes to
//! files under `--out`.

mod commands;
mod configs;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info};
use vqe_core::experiments::SweepConfig;
use vqe_core::Error;

use crate::configs::{EffectiveConfig, KappaScanConfig};

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "ovqe", version, about = "Over-parameterized VQE experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file (not used by `verify`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (default: `results/<subcommand>`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Only report errors.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One seeded training run; writes the trace.
    Train {
        /// Parameter count (default: first entry of `p_grid`).
        #[arg(long)]
        p: Option<usize>,
        /// Trial index within the sweep's seed layout.
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Y- and θ-deviation scaling sweep.
    Deviation,
    /// Success rates and over-parameterization threshold.
    Threshold,
    /// Invariant subspace, effective dimension and spectral ratios.
    Effective,
    /// Full and effective spectral ratios across a parameter grid.
    KappaScan,
    /// Built-in numerical property suite.
    Verify,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Train { .. } => "train",
            Command::Deviation => "deviation",
            Command::Threshold => "threshold",
            Command::Effective => "effective",
            Command::KappaScan => "kappa-scan",
            Command::Verify => "verify",
        }
    }
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match e {
            Error::Config(_) => (EXIT_CONFIG, "config"),
            Error::InvalidParameter(_) => (EXIT_CONFIG, "invalid_parameter"),
            Error::Guard(_) => (EXIT_RUNTIME, "dimension_guard"),
            Error::Dimension(_) => (EXIT_RUNTIME, "dimension"),
            Error::NonFinite(_) => (EXIT_RUNTIME, "non_finite"),
            Error::Io(_) => (EXIT_RUNTIME, "io"),
            _ => (EXIT_RUNTIME, "runtime"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

fn config_path(cli: &Cli) -> Result<&Path, Failure> {
    cli.config.as_deref().ok_or_else(|| Failure {
        code: EXIT_CONFIG,
        kind: "config",
        message: format!("`{}` needs --config <path>", cli.command.name()),
    })
}

fn load_sweep(cli: &Cli) -> Result<SweepConfig, Failure> {
    let mut cfg = SweepConfig::load(config_path(cli)?)?;
    if let Some(seed) = cli.seed {
        cfg.base_seed = seed;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("results").join(cli.command.name()));
    let summary = match cli.command {
        Command::Train { p, trial } => {
            let cfg = load_sweep(cli)?;
            commands::train(&cfg, &out, p, trial)?
        }
        Command::Deviation => commands::deviation(&load_sweep(cli)?, &out)?,
        Command::Threshold => commands::threshold(&load_sweep(cli)?, &out)?,
        Command::Effective => {
            let mut cfg: EffectiveConfig = configs::load(config_path(cli)?)?;
            if let Some(seed) = cli.seed {
                cfg.estimation.seed = seed;
            }
            commands::effective(&cfg, &out)?
        }
        Command::KappaScan => {
            let mut cfg: KappaScanConfig = configs::load(config_path(cli)?)?;
            if let Some(seed) = cli.seed {
                cfg.estimation.seed = seed;
            }
            commands::kappa_scan_cmd(&cfg, &out)?
        }
        Command::Verify => {
            let report = commands::verify(cli.seed.unwrap_or(0), cli.out.as_deref())?;
            let line = format!(
                "{} cases passed, {} failed",
                report.passed(),
                report.failed()
            );
            if !report.all_passed() {
                return Err(Failure {
                    code: EXIT_VERIFY,
                    kind: "verify",
                    message: line,
                });
            }
            line
        }
    };
    info!("{}: {summary}", cli.command.name());
    if !matches!(cli.command, Command::Verify) {
        info!("results written to {}", out.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_target(false)
        .init();

    match vqe_core::exec::with_workers(cli.workers, || run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            error!("{}", f.message);
            eprintln!(
                "{}",
                serde_json::json!({ "error": f.kind, "exit_code": f.code, "message": f.message })
            );
            ExitCode::from(f.code)
        }
    }
}
