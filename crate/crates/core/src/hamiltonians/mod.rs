//! Problem Hamiltonians, generator sets, input states and synthetic instances.

mod generators;
mod models;
mod pauli;
mod spec;
mod states;
mod synthetic;

pub use generators::{cz_layer_signs, GeneratorSet, GeneratorSpec, GENERATOR_TOL};
pub use models::{bond_terms, field_terms, kitaev8, m_hea, tfi1d, xxz1d, Bonds};
pub use models::{KITAEV_QUBITS, KITAEV_X_BONDS, KITAEV_Y_BONDS, KITAEV_Z_BONDS};
pub use pauli::{pauli_sum, Pauli, PauliString, MAX_QUBITS};
pub use spec::{dump_matrix, read_matrix_le, write_matrix_le, ModelSpec};
pub use states::InputState;
pub use synthetic::{make_synthetic, synthetic_spectrum, SyntheticInstance};

/// `pauli_string_matrix` as a free function.
pub fn pauli_string_matrix(
    s: &PauliString,
) -> crate::error::Result<crate::linalg::HermitianOperator> {
    s.matrix()
}
