//! Dense complex linear algebra sized for small state spaces.

mod haar;
mod hermitian;
mod matrix;
mod state;

pub use haar::{gaussian_matrix, haar_state, haar_unitary, haar_unitary_u};
pub use hermitian::{
    eig_hermitian, eig_hermitian_raw, HermitianOperator, Spectrum, HERMITICITY_TOL,
};
pub use matrix::{inner, norm2, outer, swap_operator, ComplexMatrix, C64, I, ONE, ZERO};
pub use state::StateVector;
