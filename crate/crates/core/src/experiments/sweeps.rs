use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ProblemSpec, SweepConfig};
use crate::ansatz::PartiallyTrainableAnsatz;
use crate::ansatz::{build_partially_trainable, AnsatzKind, AnyAnsatz, FullyTrainableAnsatz};
use crate::dynamics::{gradient_descent, initial_theta, linear_fit};
use crate::dynamics::{RecordingPolicy, Termination, TrainingOptions, TrainingTrace, VqeInstance};
use crate::effective::{effective_profile, ProfileOptions, ProfileSummary};
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::hamiltonians::{make_synthetic, GeneratorSet};
use crate::linalg::{HermitianOperator, StateVector};
use crate::seed::{derive_seed, rng_from_seed, SimRng};

/// Objects shared read-only by every trial of a sweep.
pub struct SweepContext {
    config: SweepConfig,
    fixed: Option<(HermitianOperator, GeneratorSet, StateVector)>,
}

impl SweepContext {
    pub fn new(config: &SweepConfig) -> Result<Self> {
        config.validate()?;
        let fixed = match config.problem {
            ProblemSpec::Hamiltonian {
                model, generators, ..
            } => {
                let m = model.build()?;
                let gens = GeneratorSet::from_spec(&generators)?.with_universal(config.universal);
                if gens.dim() != m.dim() {
                    return Err(Error::Config(format!(
                        "generator set {} acts on dimension {} but the model has {}",
                        generators.name(),
                        gens.dim(),
                        m.dim()
                    )));
                }
                gens.warm_spectra()?;
                m.try_spectrum()?;
                let input = config.problem.input_state().expect("hamiltonian problem");
                let phi = input.build(model.n_qubits())?;
                Some((m, gens, phi))
            }
            ProblemSpec::Synthetic { .. } => None,
        };
        Ok(Self {
            config: config.clone(),
            fixed,
        })
    }

    pub fn config(&self) -> &SweepConfig {
        &self.config
    }

    /// Stream seed of trial `(p, trial)`.
    pub fn trial_seed(&self, p: usize, trial: usize) -> u64 {
        derive_seed(self.config.base_seed, &[p as u64, trial as u64])
    }

    /// Instance, starting point and remaining RNG stream of one trial.
    pub fn build_trial(&self, p: usize, trial: usize) -> Result<(VqeInstance, Vec<f64>, SimRng)> {
        let cfg = &self.config;
        let mut rng = rng_from_seed(self.trial_seed(p, trial));
        let inst = match (&self.fixed, cfg.problem) {
            (Some((m, gens, phi)), _) => {
                let ansatz: AnyAnsatz = match cfg.mode {
                    AnsatzKind::PartiallyTrainable => {
                        build_partially_trainable(gens, cfg.h_index, p, cfg.l_sample, &mut rng)?
                            .into()
                    }
                    AnsatzKind::FullyTrainable => {
                        let k = gens.len();
                        if !p.is_multiple_of(k) {
                            return Err(Error::Config(format!(
                                "fully-trainable p = {p} is not a multiple of K = {k}"
                            )));
                        }
                        FullyTrainableAnsatz::new(gens, p / k)?.into()
                    }
                };
                VqeInstance::new(m.clone(), phi.clone(), ansatz)?
            }
            (
                None,
                ProblemSpec::Synthetic {
                    d,
                    d_eff,
                    kappa_eff,
                },
            ) => {
                let s = make_synthetic(d, d_eff, kappa_eff, p, &mut rng)?;
                let a = PartiallyTrainableAnsatz::from_parts(s.h, s.frozen_unitaries)?;
                VqeInstance::new(s.m, s.input_state, AnyAnsatz::from(a))?
            }
            (None, _) => unreachable!("hamiltonian problems carry a fixed context"),
        };
        let theta0 = initial_theta(cfg.mode, p, &mut rng);
        Ok((inst, theta0, rng))
    }

    /// Runs one trial with the given recording policy.
    pub fn run_trial(
        &self,
        p: usize,
        trial: usize,
        record: RecordingPolicy,
        stop_on_convergence: bool,
    ) -> Result<TrainingTrace> {
        let cfg = &self.config;
        let (inst, theta0, mut rng) = self.build_trial(p, trial)?;
        let opts = TrainingOptions {
            eta: cfg.eta(p),
            max_steps: cfg.max_steps,
            convergence: cfg.success_threshold,
            noise: cfg.noise,
            record,
            stop_on_convergence,
        };
        gradient_descent(&inst, &theta0, &opts, &mut rng)
    }
}

/// Outcome of one training trial in a threshold sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub p: usize,
    pub trial: usize,
    pub seed: u64,
    pub success: bool,
    pub best_error: f64,
    pub final_error: f64,
    pub steps: usize,
    pub status: String,
}

/// Success statistics at one `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessRate {
    pub p: usize,
    pub successes: usize,
    pub trials: usize,
    pub rate: f64,
    pub records: Vec<TrialRecord>,
}

fn trial_record(ctx: &SweepContext, p: usize, trial: usize) -> TrialRecord {
    let seed = ctx.trial_seed(p, trial);
    let policy = RecordingPolicy::every(usize::MAX);
    match ctx.run_trial(p, trial, policy, true) {
        Ok(trace) => {
            let best = trace
                .records
                .iter()
                .map(|r| r.overlap_error)
                .fold(f64::INFINITY, f64::min);
            let (steps, status) = match &trace.termination {
                Termination::Converged { step } => (*step, "converged".to_string()),
                Termination::BudgetExhausted { steps } => (*steps, "budget_exhausted".to_string()),
                Termination::NonFinite { step, detail } => (*step, format!("non_finite: {detail}")),
            };
            TrialRecord {
                p,
                trial,
                seed,
                success: best < ctx.config.success_threshold,
                best_error: best,
                final_error: trace.final_overlap_error,
                steps,
                status,
            }
        }
        Err(e) => TrialRecord {
            p,
            trial,
            seed,
            success: false,
            best_error: f64::NAN,
            final_error: f64::NAN,
            steps: 0,
            status: format!("aborted: {e}"),
        },
    }
}

fn aggregate(p: usize, records: Vec<TrialRecord>) -> SuccessRate {
    let successes = records.iter().filter(|r| r.success).count();
    let trials = records.len();
    SuccessRate {
        p,
        successes,
        trials,
        rate: successes as f64 / trials as f64,
        records,
    }
}

/// Fraction of `trials_per_p` independent trainings that reach overlap error
/// below `success_threshold`.
pub fn success_rate(ctx: &SweepContext, p: usize) -> SuccessRate {
    let n = ctx.config.trials_per_p;
    let records = map_indexed(ctx.config.execution, n, |t| trial_record(ctx, p, t));
    aggregate(p, records)
}

/// Result of scanning `p_grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub label: String,
    pub points: Vec<SuccessRate>,
    /// Smallest grid `p` whose rate reaches the bar.
    pub threshold_p: Option<usize>,
    pub success_rate_bar: f64,
    /// Grid points whose rate falls more than 3σ below the previous point.
    pub monotonicity_violations: Vec<usize>,
}

impl ThresholdResult {
    pub fn rate_at(&self, p: usize) -> Option<f64> {
        self.points.iter().find(|s| s.p == p).map(|s| s.rate)
    }
}

/// Runs every `(p, trial)` of the grid as one flat parallel map.
pub fn threshold_sweep(ctx: &SweepContext) -> ThresholdResult {
    let cfg = &ctx.config;
    let n = cfg.trials_per_p;
    let flat = map_indexed(cfg.execution, cfg.p_grid.len() * n, |i| {
        trial_record(ctx, cfg.p_grid[i / n], i % n)
    });
    let mut points = Vec::with_capacity(cfg.p_grid.len());
    let mut it = flat.into_iter();
    for &p in &cfg.p_grid {
        points.push(aggregate(p, it.by_ref().take(n).collect()));
    }
    let threshold_p = points
        .iter()
        .find(|s| s.rate >= cfg.success_rate_bar - 1e-12)
        .map(|s| s.p);
    let monotonicity_violations = points
        .windows(2)
        .filter(|w| {
            let (a, b) = (&w[0], &w[1]);
            let pooled = (a.successes + b.successes) as f64 / (a.trials + b.trials) as f64;
            let sigma =
                (pooled * (1.0 - pooled) * (1.0 / a.trials as f64 + 1.0 / b.trials as f64)).sqrt();
            a.rate - b.rate > 3.0 * sigma.max(1e-12)
        })
        .map(|w| w[1].p)
        .collect();
    ThresholdResult {
        label: cfg.problem.label(),
        points,
        threshold_p,
        success_rate_bar: cfg.success_rate_bar,
        monotonicity_violations,
    }
}

/// Per-trial deviation maxima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationTrial {
    pub p: usize,
    pub trial: usize,
    pub seed: u64,
    pub max_dy_op: Option<f64>,
    pub max_dtheta_inf: f64,
    pub final_overlap_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub p: usize,
    pub trials: usize,
    pub mean_dy: f64,
    pub std_dy: f64,
    pub mean_dtheta: f64,
    pub std_dtheta: f64,
}

/// Scaling fits of the deviation means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationFits {
    /// Log–log slope of mean `‖Y − Y(0)‖` against `p`.
    pub y_slope: Option<f64>,
    /// Least-squares `c` in `c/√p`.
    pub y_constant: Option<f64>,
    /// Log–log slope of mean `‖θ − θ(0)‖_∞` against `p`.
    pub theta_slope: Option<f64>,
    /// Least-squares `c′` in `c′/p`.
    pub theta_constant: Option<f64>,
    pub reference_y: f64,
    pub reference_theta: f64,
    pub under_y_envelope: bool,
    pub under_theta_envelope: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationTable {
    pub label: String,
    pub rows: Vec<DeviationRow>,
    pub trials: Vec<DeviationTrial>,
    pub fits: DeviationFits,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, var.sqrt())
}

/// Reference constants `(c, c′)` for the `c/√p` and `c′/p` envelopes:
/// `(45, 6)` for the hardware-efficient ansatz, `(50, 1)` otherwise.
pub fn reference_constants(problem: &ProblemSpec) -> (f64, f64) {
    match problem {
        ProblemSpec::Hamiltonian {
            generators: crate::hamiltonians::GeneratorSpec::HeaCz { .. },
            ..
        } => (45.0, 6.0),
        _ => (50.0, 1.0),
    }
}

/// Tracks `max_t ‖Y(t) − Y(0)‖_op` and `max_t ‖θ(t) − θ(0)‖_∞` over a fixed
/// horizon of `max_steps` for every `(p, trial)`.
pub fn deviation_sweep(ctx: &SweepContext) -> Result<DeviationTable> {
    let cfg = &ctx.config;
    let n = cfg.trials_per_p;
    let policy = if cfg.skip_y {
        RecordingPolicy::every(usize::MAX)
    } else {
        RecordingPolicy::every(usize::MAX).with_y(cfg.y_stride)
    };
    let flat = map_indexed(cfg.execution, cfg.p_grid.len() * n, |i| {
        let (p, t) = (cfg.p_grid[i / n], i % n);
        ctx.run_trial(p, t, policy, false)
            .map(|trace| DeviationTrial {
                p,
                trial: t,
                seed: ctx.trial_seed(p, t),
                max_dy_op: trace.max_dy_op,
                max_dtheta_inf: trace.max_dtheta_inf,
                final_overlap_error: trace.final_overlap_error,
            })
    });
    let trials: Vec<DeviationTrial> = flat.into_iter().collect::<Result<_>>()?;
    let rows: Vec<DeviationRow> = cfg
        .p_grid
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let chunk = &trials[k * n..(k + 1) * n];
            let dy: Vec<f64> = chunk
                .iter()
                .map(|t| t.max_dy_op.unwrap_or(f64::NAN))
                .collect();
            let dth: Vec<f64> = chunk.iter().map(|t| t.max_dtheta_inf).collect();
            let (mean_dy, std_dy) = mean_std(&dy);
            let (mean_dtheta, std_dtheta) = mean_std(&dth);
            DeviationRow {
                p,
                trials: n,
                mean_dy,
                std_dy,
                mean_dtheta,
                std_dtheta,
            }
        })
        .collect();
    let (ref_y, ref_th) = reference_constants(&cfg.problem);
    let fits = fit_deviation(&rows, ref_y, ref_th);
    Ok(DeviationTable {
        label: cfg.problem.label(),
        rows,
        trials,
        fits,
    })
}

/// Log–log slopes and fixed-exponent constants of the deviation means.
pub fn fit_deviation(rows: &[DeviationRow], ref_y: f64, ref_theta: f64) -> DeviationFits {
    let log_pts = |f: &dyn Fn(&DeviationRow) -> f64| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| f(r) > 0.0 && f(r).is_finite())
            .map(|r| ((r.p as f64).ln(), f(r).ln()))
            .collect()
    };
    let y_pts = log_pts(&|r| r.mean_dy);
    let th_pts = log_pts(&|r| r.mean_dtheta);
    // Fixed exponent: log c = mean(log y − k log p).
    let constant = |pts: &[(f64, f64)], k: f64| -> Option<f64> {
        if pts.is_empty() {
            return None;
        }
        Some((pts.iter().map(|(lp, ly)| ly - k * lp).sum::<f64>() / pts.len() as f64).exp())
    };
    DeviationFits {
        y_slope: linear_fit(&y_pts).map(|f| f.0),
        y_constant: constant(&y_pts, -0.5),
        theta_slope: linear_fit(&th_pts).map(|f| f.0),
        theta_constant: constant(&th_pts, -1.0),
        reference_y: ref_y,
        reference_theta: ref_theta,
        under_y_envelope: rows
            .iter()
            .all(|r| r.mean_dy.is_finite() && r.mean_dy <= ref_y / (r.p as f64).sqrt()),
        under_theta_envelope: rows.iter().all(|r| r.mean_dtheta <= ref_theta / r.p as f64),
    }
}

/// One `(problem, generator set)` variant in an ansatz comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub threshold_p: Option<usize>,
    pub rates: Vec<(usize, f64)>,
    pub profile: Option<ProfileSummary>,
}

/// Threshold sweeps for several configurations, each annotated with its
/// effective profile (hamiltonian problems only). Incompatible variants are
/// flagged in the profile and still run.
pub fn ansatz_comparison(
    configs: &[SweepConfig],
    profile_opts: &ProfileOptions,
) -> Result<Vec<ComparisonRow>> {
    configs
        .iter()
        .map(|cfg| {
            let ctx = SweepContext::new(cfg)?;
            let profile = match &ctx.fixed {
                Some((m, gens, phi)) => {
                    let p = effective_profile(m, gens, phi, profile_opts)?;
                    if !p.compatibility.compatible {
                        log::warn!(
                            "{}: ground state leaks {:.3e} out of the invariant subspace",
                            cfg.problem.label(),
                            p.compatibility.ground_leakage
                        );
                    }
                    Some(p.summary())
                }
                None => None,
            };
            let res = threshold_sweep(&ctx);
            Ok(ComparisonRow {
                label: if cfg.name.is_empty() {
                    cfg.problem.label()
                } else {
                    cfg.name.clone()
                },
                threshold_p: res.threshold_p,
                rates: res.points.iter().map(|s| (s.p, s.rate)).collect(),
                profile,
            })
        })
        .collect()
}

/// Writes per-trial trace CSVs under `dir/traces/`.
pub fn write_trial_traces(ctx: &SweepContext, dir: &Path, with_y: bool) -> Result<()> {
    let cfg = &ctx.config;
    let out = dir.join("traces");
    std::fs::create_dir_all(&out)?;
    let n = cfg.trials_per_p;
    let policy = if with_y {
        RecordingPolicy::every(100).with_y(cfg.y_stride)
    } else {
        RecordingPolicy::every(100)
    };
    let results = map_indexed(cfg.execution, cfg.p_grid.len() * n, |i| {
        let (p, t) = (cfg.p_grid[i / n], i % n);
        ctx.run_trial(p, t, policy, !with_y)
            .and_then(|trace| trace.save_csv(&out.join(format!("p{p}_trial{t}.csv"))))
    });
    results.into_iter().collect()
}
