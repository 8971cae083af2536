//! Exact state-vector simulation of variational quantum eigensolvers (VQE)
//! in the over-parameterized regime.
//!
//! The crate covers ansatz construction (fully- and partially-trainable),
//! analytic-gradient training with optional gradient noise, the
//! parameterized projection operator `Y` and its deviation during training,
//! estimation of the ansatz-induced invariant subspace (effective dimension
//! and effective spectral ratio), and seeded Monte-Carlo sweeps that measure
//! over-parameterization thresholds.

// Guards such as `!(x > 0.0)` are written that way so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod hamiltonians;
pub mod linalg;
pub mod seed;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
