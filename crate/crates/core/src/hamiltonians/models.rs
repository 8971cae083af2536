use super::pauli::{pauli_sum, Pauli, PauliString, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::linalg::HermitianOperator;

/// Which periodic bonds `(i, i+1 mod n)` to include, selected by the parity of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bonds {
    All,
    Even,
    Odd,
}

impl Bonds {
    pub fn sites(self, n: usize) -> Vec<(usize, usize)> {
        (0..n)
            .filter(|i| match self {
                Bonds::All => true,
                Bonds::Even => i % 2 == 0,
                Bonds::Odd => i % 2 == 1,
            })
            .map(|i| (i, (i + 1) % n))
            .collect()
    }
}

pub(crate) fn check_register(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidParameter(format!(
            "register of {n} qubits is below the minimum of {min}"
        )));
    }
    if n > MAX_QUBITS {
        return Err(Error::Guard(format!(
            "{n} qubits exceeds the dense limit of {MAX_QUBITS}"
        )));
    }
    Ok(())
}

pub(crate) fn check_even(n: usize) -> Result<()> {
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "even/odd bond split needs an even qubit count, got {n}"
        )));
    }
    Ok(())
}

pub(crate) fn check_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{name} must be finite, got {v}"
        )));
    }
    Ok(())
}

/// Two-site coupling terms `P_i P_j` over the selected bonds.
pub fn bond_terms(n: usize, bonds: Bonds, p: Pauli, coefficient: f64) -> Vec<PauliString> {
    bonds
        .sites(n)
        .into_iter()
        .map(|(i, j)| PauliString::sparse(n, &[(i, p), (j, p)], coefficient))
        .collect()
}

/// Single-site terms `P_i` on every qubit.
pub fn field_terms(n: usize, p: Pauli, coefficient: f64) -> Vec<PauliString> {
    (0..n)
        .map(|i| PauliString::sparse(n, &[(i, p)], coefficient))
        .collect()
}

/// Periodic transverse-field Ising chain `Σ X_i X_{i+1} + g Σ Z_i`.
pub fn tfi1d(n: usize, g: f64) -> Result<HermitianOperator> {
    check_register(n, 2)?;
    check_finite("g", g)?;
    let mut terms = bond_terms(n, Bonds::All, Pauli::X, 1.0);
    terms.extend(field_terms(n, Pauli::Z, g));
    pauli_sum(n, &terms)
}

/// Periodic XXZ chain `Σ (X_i X_{i+1} + Y_i Y_{i+1} + J_zz Z_i Z_{i+1})`.
pub fn xxz1d(n: usize, j_zz: f64) -> Result<HermitianOperator> {
    check_register(n, 2)?;
    check_even(n)?;
    check_finite("j_zz", j_zz)?;
    let mut terms = bond_terms(n, Bonds::All, Pauli::X, 1.0);
    terms.extend(bond_terms(n, Bonds::All, Pauli::Y, 1.0));
    terms.extend(bond_terms(n, Bonds::All, Pauli::Z, j_zz));
    pauli_sum(n, &terms)
}

pub const KITAEV_QUBITS: usize = 8;
pub const KITAEV_X_BONDS: [(usize, usize); 2] = [(0, 1), (2, 3)];
pub const KITAEV_Y_BONDS: [(usize, usize); 2] = [(1, 2), (0, 3)];
pub const KITAEV_Z_BONDS: [(usize, usize); 4] = [(4, 0), (1, 5), (3, 7), (2, 6)];

fn pair_terms(pairs: &[(usize, usize)], p: Pauli, coefficient: f64) -> Vec<PauliString> {
    pairs
        .iter()
        .map(|&(i, j)| PauliString::sparse(KITAEV_QUBITS, &[(i, p), (j, p)], coefficient))
        .collect()
}

/// Eight-qubit Kitaev-type model
/// `Σ_{S_Z} ZZ + (J_xy/√2)(Σ_{S_X} XX + Σ_{S_Y} YY) + h Σ_i (X_i + Y_i + Z_i)`.
pub fn kitaev8(j_xy: f64, h: f64) -> Result<HermitianOperator> {
    check_finite("j_xy", j_xy)?;
    check_finite("h", h)?;
    let c = j_xy / std::f64::consts::SQRT_2;
    let mut terms = pair_terms(&KITAEV_Z_BONDS, Pauli::Z, 1.0);
    terms.extend(pair_terms(&KITAEV_X_BONDS, Pauli::X, c));
    terms.extend(pair_terms(&KITAEV_Y_BONDS, Pauli::Y, c));
    for p in [Pauli::X, Pauli::Y, Pauli::Z] {
        terms.extend(field_terms(KITAEV_QUBITS, p, h));
    }
    pauli_sum(KITAEV_QUBITS, &terms)
}

/// Diagonal objective `diag(0, 0.5, 1, …, 1)` on `n` qubits.
pub fn m_hea(n: usize) -> Result<HermitianOperator> {
    check_register(n, 1)?;
    let d = 1usize << n;
    let values: Vec<f64> = (0..d)
        .map(|i| match i {
            0 => 0.0,
            1 => 0.5,
            _ => 1.0,
        })
        .collect();
    Ok(HermitianOperator::diagonal(&values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ComplexMatrix, C64};

    #[test]
    fn bond_parity_split() {
        assert_eq!(Bonds::Even.sites(4), vec![(0, 1), (2, 3)]);
        assert_eq!(Bonds::Odd.sites(4), vec![(1, 2), (3, 0)]);
        assert_eq!(Bonds::All.sites(3), vec![(0, 1), (1, 2), (2, 0)]);
    }

    #[test]
    fn tfi_two_qubits_double_counts_the_wrapped_bond() {
        let h = tfi1d(2, 0.5).unwrap();
        let x = Pauli::X.matrix();
        let z = Pauli::Z.matrix();
        let id = ComplexMatrix::identity(2);
        let expected = &(&x.kron(&x).scale_real(2.0) + &z.kron(&id).scale_real(0.5))
            + &id.kron(&z).scale_real(0.5);
        assert!(h.matrix().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn models_are_traceless() {
        assert!(tfi1d(4, 0.3).unwrap().is_traceless(1e-12));
        assert!(xxz1d(4, -0.7).unwrap().is_traceless(1e-12));
        assert!(kitaev8(1.0, 0.1).unwrap().is_traceless(1e-10));
    }

    #[test]
    fn xxz_rejects_odd_chain() {
        assert!(xxz1d(5, 1.0).is_err());
    }

    #[test]
    fn nonfinite_coupling_rejected() {
        assert!(tfi1d(4, f64::NAN).is_err());
    }

    #[test]
    fn xxz_heisenberg_point_conserves_total_spin() {
        // At J_zz = 1 the chain is SU(2) symmetric, so it commutes with Σ Z.
        let h = xxz1d(4, 1.0).unwrap();
        let sz = pauli_sum(4, &field_terms(4, Pauli::Z, 1.0)).unwrap();
        let comm = &h.matrix().matmul(sz.matrix()) - &sz.matrix().matmul(h.matrix());
        assert!(comm.max_abs() < 1e-12);
    }

    #[test]
    fn hea_objective_spectrum() {
        let m = m_hea(3).unwrap();
        assert_eq!(m.dim(), 8);
        assert_eq!(m.matrix()[(1, 1)], C64::new(0.5, 0.0));
        assert_eq!(m.eigenvalues_only()[7], 1.0);
    }
}
