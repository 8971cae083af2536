use crate::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::linalg::{swap_operator, ComplexMatrix, HermitianOperator, C64};

/// Largest state dimension for which the `d² × d²` operator is formed.
pub const Y_MAX_DIM: usize = 64;

fn guard(d: usize) -> Result<()> {
    if d > Y_MAX_DIM {
        return Err(Error::Guard(format!(
            "Y operator needs d ≤ {Y_MAX_DIM} (d² ≤ {}), got d = {d}",
            Y_MAX_DIM * Y_MAX_DIM
        )));
    }
    Ok(())
}

/// Adds `s · K ⊗ K` into `acc` (size `d² × d²`).
fn add_kron_square(acc: &mut ComplexMatrix, k: &ComplexMatrix, s: f64) {
    let d = k.rows();
    let n = d * d;
    let data = acc.data_mut();
    for i in 0..d {
        for j in 0..d {
            let kij = k[(i, j)] * s;
            if kij == C64::new(0.0, 0.0) {
                continue;
            }
            for a in 0..d {
                let row = (i * d + a) * n + j * d;
                let krow = k.row(a);
                for (b, kab) in krow.iter().enumerate() {
                    data[row + b] += kij * kab;
                }
            }
        }
    }
}

/// `Y(θ) = (1/p) Σ_j (K_j ⊗ K_j)/Z(G_j, d)` with `K_j = S_j G_j S_j†`, `S_j`
/// the suffix product starting at rotation `j`, and `p` the number of
/// trainable parameters.
pub fn compute_y<A: Ansatz + ?Sized>(ansatz: &A, theta: &[f64]) -> Result<HermitianOperator> {
    let d = ansatz.dim();
    guard(d)?;
    let suffix = ansatz.suffix_unitaries(theta)?;
    let p = suffix.len() as f64;
    let mut acc = ComplexMatrix::zeros(d * d, d * d);
    for (j, s) in suffix.iter().enumerate() {
        let g = ansatz.generator_of_param(j);
        let k = s.matmul(g.matrix()).matmul_adjoint(s);
        add_kron_square(&mut acc, &k, 1.0 / (p * g.z_factor()));
    }
    HermitianOperator::new(acc)
}

/// `Y* = W − I/d` on `C^d ⊗ C^d`.
pub fn y_star(d: usize) -> HermitianOperator {
    let w = swap_operator(d);
    let id = ComplexMatrix::identity(d * d);
    let m = &w - &id.scale_real(1.0 / d as f64);
    HermitianOperator::new(m).expect("swap minus identity is Hermitian")
}

/// `‖A − B‖_op` for Hermitian operands.
pub fn op_norm_distance(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension("operator dimensions differ".into()));
    }
    Ok(HermitianOperator::new(a.matrix() - b.matrix())?.op_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::PartiallyTrainableAnsatz;
    use crate::hamiltonians::GeneratorSet;

    #[test]
    fn single_layer_identity_frozen() {
        let gens = GeneratorSet::tfi2(2).unwrap();
        let h = gens.generator(1).clone();
        let id = ComplexMatrix::identity(4);
        let a = PartiallyTrainableAnsatz::from_parts(h.clone(), vec![id.clone(), id]).unwrap();
        let y = compute_y(&a, &[0.0]).unwrap();
        let want = h.matrix().kron(h.matrix()).scale_real(1.0 / h.z_factor());
        assert!(y.matrix().max_abs_diff(&want) < 1e-12);
        assert!(y.trace().abs() < 1e-8);
    }

    #[test]
    fn y_star_spectrum_and_trace() {
        let y = y_star(2);
        let ev = y.eigenvalues_only();
        assert!((ev[0] + 1.5).abs() < 1e-12);
        for v in &ev[1..] {
            assert!((v - 0.5).abs() < 1e-12);
        }
        assert!(y_star(5).trace().abs() < 1e-12);
    }

    #[test]
    fn guard_rejects_large_dimension() {
        let gens = GeneratorSet::tfi2(7).unwrap();
        let a = crate::ansatz::FullyTrainableAnsatz::new(&gens, 1).unwrap();
        assert!(matches!(compute_y(&a, &[0.0, 0.0]), Err(Error::Guard(_))));
    }
}
