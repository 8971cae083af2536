//! TOML schemas for the subcommands that do not take a sweep config.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vqe_core::effective::{ProfileOptions, DEFAULT_LEAK_TOL, DEFAULT_R, DEFAULT_RANK_TOL};
use vqe_core::hamiltonians::{GeneratorSpec, InputState, ModelSpec};
use vqe_core::{Error, Execution, Result};

fn default_r() -> usize {
    DEFAULT_R
}
fn default_l_sample() -> usize {
    vqe_core::ansatz::DEFAULT_L_SAMPLE
}
fn default_rank_tol() -> f64 {
    DEFAULT_RANK_TOL
}
fn default_leak_tol() -> f64 {
    DEFAULT_LEAK_TOL
}

/// Projector-estimation settings shared by `effective` and `kappa-scan`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationSettings {
    #[serde(default = "default_r")]
    pub r_samples: usize,
    #[serde(default = "default_l_sample")]
    pub l_sample: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
    #[serde(default = "default_leak_tol")]
    pub leak_tol: f64,
    #[serde(default)]
    pub robustness: bool,
    #[serde(default)]
    pub universal: bool,
    #[serde(default)]
    pub execution: Execution,
}

impl Default for EstimationSettings {
    fn default() -> Self {
        Self {
            r_samples: DEFAULT_R,
            l_sample: default_l_sample(),
            seed: 0,
            rank_tol: DEFAULT_RANK_TOL,
            leak_tol: DEFAULT_LEAK_TOL,
            robustness: false,
            universal: false,
            execution: Execution::default(),
        }
    }
}

impl EstimationSettings {
    pub fn profile_options(&self) -> ProfileOptions {
        ProfileOptions {
            r_samples: self.r_samples,
            l_sample: self.l_sample,
            seed: self.seed,
            rank_tol: self.rank_tol,
            leak_tol: self.leak_tol,
            robustness: self.robustness,
            execution: self.execution,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.r_samples == 0 || self.l_sample == 0 {
            return Err(Error::Config(
                "r_samples and l_sample must be positive".into(),
            ));
        }
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return Err(Error::Config(format!(
                "rank_tol must lie in (0, 1), got {}",
                self.rank_tol
            )));
        }
        Ok(())
    }
}

/// `effective`: invariant-subspace profile of one model and generator set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveConfig {
    #[serde(default)]
    pub name: String,
    pub model: ModelSpec,
    pub generators: GeneratorSpec,
    #[serde(default)]
    pub input: Option<InputState>,
    /// Also write the `d × d_eff` basis as raw little-endian doubles.
    #[serde(default)]
    pub dump_basis: bool,
    #[serde(default)]
    pub estimation: EstimationSettings,
}

impl EffectiveConfig {
    pub fn input_state(&self) -> InputState {
        self.input.unwrap_or_else(|| self.model.default_input())
    }

    pub fn validate(&self) -> Result<()> {
        self.estimation.validate()
    }
}

/// Parameter grid: either explicit values or `steps` evenly spaced points
/// from `start` to `stop` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values { values: Vec<f64> },
    Linspace { start: f64, stop: f64, steps: usize },
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>> {
        match *self {
            Grid::Values { ref values } if !values.is_empty() => Ok(values.clone()),
            Grid::Values { .. } => Err(Error::Config("scan grid is empty".into())),
            Grid::Linspace { steps: 0, .. } => {
                Err(Error::Config("scan grid needs steps ≥ 1".into()))
            }
            Grid::Linspace {
                start, steps: 1, ..
            } => Ok(vec![start]),
            Grid::Linspace { start, stop, steps } => Ok((0..steps)
                .map(|i| start + (stop - start) * i as f64 / (steps - 1) as f64)
                .collect()),
        }
    }
}

/// `kappa-scan`: full and effective spectral ratios as one model parameter
/// varies (TFI `g`, XXZ `j_zz`, Kitaev `h`). The invariant subspace does not
/// depend on the objective, so it is estimated once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaScanConfig {
    #[serde(default)]
    pub name: String,
    pub model: ModelSpec,
    pub generators: GeneratorSpec,
    #[serde(default)]
    pub input: Option<InputState>,
    pub grid: Grid,
    #[serde(default)]
    pub estimation: EstimationSettings,
}

impl KappaScanConfig {
    pub fn input_state(&self) -> InputState {
        self.input.unwrap_or_else(|| self.model.default_input())
    }

    pub fn validate(&self) -> Result<()> {
        self.estimation.validate()?;
        self.grid.points()?;
        with_param(&self.model, 0.0).map(|_| ())
    }
}

/// The model with its scanned parameter replaced by `x`.
pub fn with_param(model: &ModelSpec, x: f64) -> Result<ModelSpec> {
    Ok(match *model {
        ModelSpec::Tfi1d { n, .. } => ModelSpec::Tfi1d { n, g: x },
        ModelSpec::Xxz1d { n, .. } => ModelSpec::Xxz1d { n, j_zz: x },
        ModelSpec::Kitaev8 { j_xy, .. } => ModelSpec::Kitaev8 { j_xy, h: x },
        ModelSpec::HeaDiag { .. } => {
            return Err(Error::Config("hea_diag has no scan parameter".into()));
        }
    })
}

/// Reads and validates a TOML config.
pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_is_inclusive() {
        let g = Grid::Linspace {
            start: -1.0,
            stop: 1.0,
            steps: 5,
        };
        assert_eq!(g.points().unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn parses_effective_config() {
        let cfg: EffectiveConfig = toml::from_str(
            r#"
            model = { model = "kitaev8", j_xy = 1.0, h = 1.0 }
            generators = { set = "kitaev_hva" }
            [estimation]
            r_samples = 50
            "#,
        )
        .unwrap();
        assert_eq!(cfg.estimation.r_samples, 50);
        assert_eq!(cfg.estimation.l_sample, 20);
        assert_eq!(cfg.input_state(), InputState::Zero);
    }

    #[test]
    fn rejects_unknown_keys() {
        let r: std::result::Result<EffectiveConfig, _> = toml::from_str(
            r#"
            model = { model = "tfi1d", n = 4, g = 1.0 }
            generators = { set = "tfi2", n = 4 }
            bogus = 1
            "#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn scan_parameter_substitution() {
        let m = ModelSpec::Xxz1d { n: 4, j_zz: 0.0 };
        assert_eq!(
            with_param(&m, -0.5).unwrap(),
            ModelSpec::Xxz1d { n: 4, j_zz: -0.5 }
        );
        assert!(with_param(&ModelSpec::HeaDiag { n: 2 }, 1.0).is_err());
    }
}
