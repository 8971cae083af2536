use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzKind, DEFAULT_L_SAMPLE};
use crate::dynamics::{NoiseSpec, DEFAULT_CONVERGENCE, DEFAULT_MAX_STEPS};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hamiltonians::{GeneratorSpec, InputState, ModelSpec};

/// What is being trained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    /// A named Hamiltonian with a generator set. `input` overrides the
    /// model's default input state.
    Hamiltonian {
        model: ModelSpec,
        generators: GeneratorSpec,
        #[serde(default)]
        input: Option<InputState>,
    },
    /// A fresh random embedded instance per trial.
    Synthetic {
        d: usize,
        d_eff: usize,
        kappa_eff: f64,
    },
}

impl ProblemSpec {
    pub fn label(&self) -> String {
        match self {
            ProblemSpec::Hamiltonian {
                model, generators, ..
            } => format!("{}/{}", model_label(model), generators.name()),
            ProblemSpec::Synthetic {
                d,
                d_eff,
                kappa_eff,
            } => format!("synthetic(d={d},d_eff={d_eff},kappa_eff={kappa_eff})"),
        }
    }

    pub fn input_state(&self) -> Option<InputState> {
        match self {
            ProblemSpec::Hamiltonian { model, input, .. } => {
                Some(input.unwrap_or_else(|| model.default_input()))
            }
            ProblemSpec::Synthetic { .. } => None,
        }
    }
}

fn model_label(m: &ModelSpec) -> String {
    match m {
        ModelSpec::Tfi1d { n, g } => format!("tfi1d(n={n},g={g})"),
        ModelSpec::Xxz1d { n, j_zz } => format!("xxz1d(n={n},j_zz={j_zz})"),
        ModelSpec::Kitaev8 { j_xy, h } => format!("kitaev8(j_xy={j_xy},h={h})"),
        ModelSpec::HeaDiag { n } => format!("hea_diag(n={n})"),
    }
}

fn default_mode() -> AnsatzKind {
    AnsatzKind::PartiallyTrainable
}
fn default_l_sample() -> usize {
    DEFAULT_L_SAMPLE
}
fn default_trials() -> usize {
    20
}
fn default_eta_c() -> f64 {
    1e-2
}
fn default_max_steps() -> usize {
    DEFAULT_MAX_STEPS
}
fn default_threshold() -> f64 {
    DEFAULT_CONVERGENCE
}
fn default_bar() -> f64 {
    0.98
}

/// One experiment: a problem, an ansatz mode, and a grid of `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub name: String,
    pub problem: ProblemSpec,
    #[serde(default = "default_mode")]
    pub mode: AnsatzKind,
    #[serde(default)]
    pub h_index: usize,
    #[serde(default = "default_l_sample")]
    pub l_sample: usize,
    /// Draw frozen unitaries directly from SU(d).
    #[serde(default)]
    pub universal: bool,
    pub p_grid: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials_per_p: usize,
    /// Learning rate `η = eta_c / p`.
    #[serde(default = "default_eta_c")]
    pub eta_c: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_threshold")]
    pub success_threshold: f64,
    #[serde(default = "default_bar")]
    pub success_rate_bar: f64,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub base_seed: u64,
    /// Stride of `Y` snapshots in deviation sweeps (0: geometric schedule only).
    #[serde(default)]
    pub y_stride: usize,
    /// Skip `Y` tracking in deviation sweeps.
    #[serde(default)]
    pub skip_y: bool,
    #[serde(default)]
    pub execution: Execution,
    /// Write one trace CSV per trial.
    #[serde(default)]
    pub write_traces: bool,
}

impl SweepConfig {
    pub fn new(problem: ProblemSpec, p_grid: Vec<usize>) -> Self {
        Self {
            name: String::new(),
            problem,
            mode: default_mode(),
            h_index: 0,
            l_sample: DEFAULT_L_SAMPLE,
            universal: false,
            p_grid,
            trials_per_p: default_trials(),
            eta_c: default_eta_c(),
            max_steps: DEFAULT_MAX_STEPS,
            success_threshold: DEFAULT_CONVERGENCE,
            success_rate_bar: default_bar(),
            noise: NoiseSpec::none(),
            base_seed: 0,
            y_stride: 0,
            skip_y: false,
            execution: Execution::default(),
            write_traces: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.p_grid.is_empty() {
            return bad("p_grid is empty".into());
        }
        if self.p_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("p_grid must be strictly ascending".into());
        }
        if self.p_grid[0] == 0 {
            return bad("p must be positive".into());
        }
        if self.trials_per_p == 0 {
            return bad("trials_per_p must be at least 1".into());
        }
        if !(self.eta_c > 0.0) || !self.eta_c.is_finite() {
            return bad(format!("eta_c must be positive, got {}", self.eta_c));
        }
        if !(self.success_threshold > 0.0) {
            return bad("success_threshold must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.success_rate_bar) {
            return bad("success_rate_bar must lie in [0, 1]".into());
        }
        self.noise
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if let ProblemSpec::Synthetic {
            d,
            d_eff,
            kappa_eff,
        } = self.problem
        {
            if d_eff < 2 || d_eff > d || !(kappa_eff >= 1.0) {
                return bad(format!(
                    "synthetic problem needs 2 ≤ d_eff ≤ d and kappa_eff ≥ 1, got d={d}, d_eff={d_eff}, kappa_eff={kappa_eff}"
                ));
            }
            if self.mode != AnsatzKind::PartiallyTrainable {
                return bad("synthetic problems use the partially-trainable ansatz".into());
            }
        }
        Ok(())
    }

    /// `η = eta_c / p`
    pub fn eta(&self, p: usize) -> f64 {
        self.eta_c / p as f64
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "tfi"
p_grid = [4, 8, 16]
trials_per_p = 5
base_seed = 3

[problem]
kind = "hamiltonian"
model = { model = "tfi1d", n = 4, g = 0.3 }
generators = { set = "tfi2", n = 4 }
input = "zero"
"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = SweepConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(cfg.p_grid, vec![4, 8, 16]);
        assert_eq!(cfg.mode, AnsatzKind::PartiallyTrainable);
        assert_eq!(cfg.l_sample, 20);
        assert_eq!(cfg.max_steps, 10_000);
        assert_eq!(cfg.problem.input_state(), Some(InputState::Zero));
        assert!((cfg.eta(8) - 1.25e-3).abs() < 1e-15);
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = SweepConfig::from_toml_str(SAMPLE).unwrap();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(SweepConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_invalid() {
        for (from, to) in [
            ("p_grid = [4, 8, 16]", "p_grid = [8, 4]"),
            ("p_grid = [4, 8, 16]", "p_grid = []"),
            ("trials_per_p = 5", "trials_per_p = 0"),
            ("base_seed = 3", "base_seed = 3\nbogus = 1"),
        ] {
            let text = SAMPLE.replace(from, to);
            assert!(
                matches!(SweepConfig::from_toml_str(&text), Err(Error::Config(_))),
                "{to}"
            );
        }
    }
}
