use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::instance::VqeInstance;
use super::yop::{compute_y, op_norm_distance};
use crate::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::linalg::HermitianOperator;

/// Default overlap-error threshold for declaring convergence.
pub const DEFAULT_CONVERGENCE: f64 = 0.01;
/// Default step budget.
pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    None,
    GaussianIid,
}

/// Additive gradient noise `ε ~ N(0, sigma)` per component; `sigma` is the
/// variance.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    #[serde(default)]
    pub sigma: f64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn gaussian(variance: f64) -> Self {
        Self {
            kind: NoiseKind::GaussianIid,
            sigma: variance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be finite and non-negative, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    fn sampler(&self) -> Option<Normal<f64>> {
        match self.kind {
            NoiseKind::GaussianIid if self.sigma > 0.0 => {
                Some(Normal::new(0.0, self.sigma.sqrt()).expect("validated variance"))
            }
            _ => None,
        }
    }
}

/// Which steps to record and when to snapshot `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordingPolicy {
    /// Record scalar metrics every `stride` steps (plus the first and last).
    pub stride: usize,
    /// Snapshot `‖Y(t) − Y(0)‖_op` at steps 0, 1, 2, 4, 8, ….
    pub y_geometric: bool,
    /// Additional `Y` snapshots every `y_stride` steps (0 disables).
    pub y_stride: usize,
    /// Store `θ` in every recorded row.
    pub store_theta: bool,
}

impl Default for RecordingPolicy {
    fn default() -> Self {
        Self {
            stride: 1,
            y_geometric: false,
            y_stride: 0,
            store_theta: false,
        }
    }
}

impl RecordingPolicy {
    /// Scalar metrics only, every `stride` steps.
    pub fn every(stride: usize) -> Self {
        Self {
            stride: stride.max(1),
            ..Self::default()
        }
    }

    /// Geometric plus strided `Y` snapshots.
    pub fn with_y(mut self, y_stride: usize) -> Self {
        self.y_geometric = true;
        self.y_stride = y_stride;
        self
    }

    pub fn tracks_y(&self) -> bool {
        self.y_geometric || self.y_stride > 0
    }

    fn y_due(&self, step: usize) -> bool {
        (self.y_geometric && (step == 0 || step.is_power_of_two()))
            || (self.y_stride > 0 && step.is_multiple_of(self.y_stride))
    }

    fn row_due(&self, step: usize) -> bool {
        step.is_multiple_of(self.stride.max(1))
    }
}

/// Gradient-descent hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingOptions {
    pub eta: f64,
    pub max_steps: usize,
    pub convergence: f64,
    pub noise: NoiseSpec,
    pub record: RecordingPolicy,
    /// Stop once the overlap error drops below `convergence`.
    pub stop_on_convergence: bool,
}

impl TrainingOptions {
    pub fn new(eta: f64) -> Self {
        Self {
            eta,
            max_steps: DEFAULT_MAX_STEPS,
            convergence: DEFAULT_CONVERGENCE,
            noise: NoiseSpec::none(),
            record: RecordingPolicy::default(),
            stop_on_convergence: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Converged { step: usize },
    BudgetExhausted { steps: usize },
    NonFinite { step: usize, detail: String },
}

impl Termination {
    pub fn converged(&self) -> bool {
        matches!(self, Termination::Converged { .. })
    }
}

/// One recorded step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub loss: f64,
    pub overlap_error: f64,
    pub dtheta_inf: f64,
    pub dtheta_2: f64,
    pub dy_op: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
}

/// Output of [`gradient_descent`]. The running maxima cover every step, not
/// only the recorded ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub records: Vec<StepRecord>,
    pub termination: Termination,
    pub final_theta: Vec<f64>,
    pub final_loss: f64,
    pub final_overlap_error: f64,
    pub max_dtheta_inf: f64,
    pub max_dtheta_2: f64,
    pub max_dy_op: Option<f64>,
}

#[derive(Serialize)]
struct CsvRow {
    step: usize,
    loss: f64,
    overlap_error: f64,
    dtheta_inf: f64,
    dtheta_2: f64,
    dy_op: String,
}

impl TrainingTrace {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.records {
            wr.serialize(CsvRow {
                step: r.step,
                loss: r.loss,
                overlap_error: r.overlap_error,
                dtheta_inf: r.dtheta_inf,
                dtheta_2: r.dtheta_2,
                dy_op: r.dy_op.map(|v| v.to_string()).unwrap_or_default(),
            })?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn converged(&self) -> bool {
        self.termination.converged()
    }
}

/// Reproducibility manifest written next to a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceManifest {
    pub seed: u64,
    pub eta: f64,
    pub p: usize,
    pub model: serde_json::Value,
    pub noise: NoiseSpec,
    pub termination: Termination,
}

/// `(max_t ‖Y(t) − Y(0)‖_op, max_t ‖θ(t) − θ(0)‖_∞)` from the running maxima.
/// The first entry is zero when `Y` was not tracked.
pub fn deviation_metrics(trace: &TrainingTrace) -> (f64, f64) {
    (trace.max_dy_op.unwrap_or(0.0), trace.max_dtheta_inf)
}

/// Iterates `θ ← θ − η(∇L(θ) + ε)`.
pub fn gradient_descent<A: Ansatz, R: Rng + ?Sized>(
    inst: &VqeInstance<A>,
    theta0: &[f64],
    opts: &TrainingOptions,
    rng: &mut R,
) -> Result<TrainingTrace> {
    if !(opts.eta > 0.0) || !opts.eta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "eta must be positive, got {}",
            opts.eta
        )));
    }
    opts.noise.validate()?;
    inst.ansatz().circuit().check_theta(theta0)?;
    let noise = opts.noise.sampler();
    let rec = &opts.record;
    let y0: Option<HermitianOperator> = if rec.tracks_y() {
        Some(compute_y(inst.ansatz(), theta0)?)
    } else {
        None
    };

    let mut theta = theta0.to_vec();
    let mut records = Vec::new();
    let mut max_inf = 0.0f64;
    let mut max_2 = 0.0f64;
    let mut max_dy: Option<f64> = y0.as_ref().map(|_| 0.0);
    let mut step = 0usize;
    let termination;

    loop {
        let eval = match inst.evaluate(&theta) {
            Ok(e) => e,
            Err(Error::NonFinite(detail)) => {
                termination = Termination::NonFinite { step, detail };
                break;
            }
            Err(e) => return Err(e),
        };
        let err = inst.overlap_error(&eval.psi);
        let (d_inf, d_2) = theta_distance(&theta, theta0);
        max_inf = max_inf.max(d_inf);
        max_2 = max_2.max(d_2);

        let done_converged = opts.stop_on_convergence && err < opts.convergence;
        let done_budget = step >= opts.max_steps;
        let last = done_converged || done_budget;

        let dy = match &y0 {
            Some(y0) if rec.y_due(step) || last => {
                let v = op_norm_distance(&compute_y(inst.ansatz(), &theta)?, y0)?;
                max_dy = Some(max_dy.unwrap_or(0.0).max(v));
                Some(v)
            }
            _ => None,
        };
        if rec.row_due(step) || last || dy.is_some() {
            records.push(StepRecord {
                step,
                loss: eval.loss,
                overlap_error: err,
                dtheta_inf: d_inf,
                dtheta_2: d_2,
                dy_op: dy,
                theta: rec.store_theta.then(|| theta.clone()),
            });
        }
        if done_converged {
            termination = Termination::Converged { step };
            break;
        }
        if done_budget {
            termination = Termination::BudgetExhausted { steps: step };
            break;
        }

        for (t, g) in theta.iter_mut().zip(&eval.gradient) {
            let eps = noise.as_ref().map_or(0.0, |n| n.sample(rng));
            *t -= opts.eta * (g + eps);
        }
        step += 1;
    }

    let (final_loss, final_err) = match records.last() {
        Some(r) => (r.loss, r.overlap_error),
        None => (f64::NAN, f64::NAN),
    };
    Ok(TrainingTrace {
        records,
        termination,
        final_theta: theta,
        final_loss,
        final_overlap_error: final_err,
        max_dtheta_inf: max_inf,
        max_dtheta_2: max_2,
        max_dy_op: max_dy,
    })
}

fn theta_distance(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut inf = 0.0f64;
    let mut sq = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let d = (x - y).abs();
        inf = inf.max(d);
        sq += d * d;
    }
    (inf, sq.sqrt())
}

/// Default starting point: zeros for partially-trainable circuits, uniform on
/// `[0, 2π)` for fully-trainable ones.
pub fn initial_theta<R: Rng + ?Sized>(
    kind: crate::ansatz::AnsatzKind,
    p: usize,
    rng: &mut R,
) -> Vec<f64> {
    match kind {
        crate::ansatz::AnsatzKind::PartiallyTrainable => vec![0.0; p],
        crate::ansatz::AnsatzKind::FullyTrainable => (0..p)
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect(),
    }
}
