//! Seeded Monte-Carlo sweeps: success rates, over-parameterization
//! thresholds, deviation scaling and ansatz comparisons.

mod config;
mod output;
mod sweeps;

pub use config::{ProblemSpec, SweepConfig};
pub use output::{write_comparison, write_config, write_deviation, write_manifest};
pub use output::{write_threshold, Manifest, CODE_VERSION};
pub use sweeps::{ansatz_comparison, deviation_sweep, fit_deviation, reference_constants};
pub use sweeps::{success_rate, threshold_sweep, write_trial_traces, SweepContext};
pub use sweeps::{ComparisonRow, DeviationFits, DeviationRow, DeviationTable, DeviationTrial};
pub use sweeps::{SuccessRate, ThresholdResult, TrialRecord};

#[cfg(test)]
mod tests;
