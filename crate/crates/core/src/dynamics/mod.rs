//! Loss, analytic gradients, (noisy) gradient descent, the `Y` operator and
//! the reference Riemannian gradient flow.

mod instance;
mod rgf;
mod training;
mod yop;

pub use instance::{spectral_ratio, trace_of_product, Evaluation, VqeInstance, DEGENERACY_TOL};
pub use rgf::{fit_exponential_rate, linear_fit, rgf_integrate, FlowPoint};
pub use training::{deviation_metrics, gradient_descent, initial_theta};
pub use training::{NoiseKind, NoiseSpec, RecordingPolicy, StepRecord, Termination};
pub use training::{TraceManifest, TrainingOptions, TrainingTrace};
pub use training::{DEFAULT_CONVERGENCE, DEFAULT_MAX_STEPS};
pub use yop::{compute_y, op_norm_distance, y_star, Y_MAX_DIM};

#[cfg(test)]
mod tests;
