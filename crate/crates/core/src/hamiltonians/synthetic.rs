use rand::Rng;

use super::models::check_finite;
use crate::error::{Error, Result};
use crate::linalg::{gaussian_matrix, haar_state, haar_unitary, ComplexMatrix, HermitianOperator};
use crate::linalg::{StateVector, C64};

/// Random problem embedded in a `d_eff`-dimensional subspace of a
/// `d`-dimensional space.
#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub d: usize,
    pub d_eff: usize,
    pub kappa_eff: f64,
    pub m: HermitianOperator,
    pub h: HermitianOperator,
    /// `U_0, …, U_p` in application order.
    pub frozen_unitaries: Vec<ComplexMatrix>,
    pub input_state: StateVector,
    /// Unitary whose first `d_eff` columns span the subspace.
    pub embedding: ComplexMatrix,
}

impl SyntheticInstance {
    /// `d × d_eff` isometry onto the embedded subspace.
    pub fn subspace_basis(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.d, self.d_eff, |r, c| self.embedding[(r, c)])
    }
}

/// Block-embeds `a` (size `k`) as `E (a ⊕ fill·I) E†`.
fn embed(e: &ComplexMatrix, a: &ComplexMatrix, fill: f64) -> ComplexMatrix {
    let d = e.rows();
    let k = a.rows();
    let block = ComplexMatrix::from_fn(d, d, |r, c| {
        if r < k && c < k {
            a[(r, c)]
        } else if r == c {
            C64::new(fill, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    e.matmul(&block).matmul_adjoint(e)
}

/// Spectrum of the embedded objective: `(0, 1/κ, 1, …, 1)` of length `d`.
pub fn synthetic_spectrum(d: usize, kappa_eff: f64) -> Vec<f64> {
    (0..d)
        .map(|i| match i {
            0 => 0.0,
            1 => 1.0 / kappa_eff,
            _ => 1.0,
        })
        .collect()
}

/// Draws a synthetic instance with `p` trainable layers (and so `p + 1`
/// frozen unitaries). RNG consumption order: embedding, GUE block, frozen
/// unitaries, input state.
pub fn make_synthetic<R: Rng + ?Sized>(
    d: usize,
    d_eff: usize,
    kappa_eff: f64,
    p: usize,
    rng: &mut R,
) -> Result<SyntheticInstance> {
    check_finite("kappa_eff", kappa_eff)?;
    if d_eff < 2 || d_eff > d {
        return Err(Error::InvalidParameter(format!(
            "need 2 ≤ d_eff ≤ d, got d_eff = {d_eff}, d = {d}"
        )));
    }
    if kappa_eff < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "kappa_eff must be at least 1, got {kappa_eff}"
        )));
    }
    if p < 1 {
        return Err(Error::InvalidParameter("p must be at least 1".into()));
    }

    let embedding = haar_unitary(d, rng);
    let m1 = ComplexMatrix::from_real_diagonal(&synthetic_spectrum(d_eff, kappa_eff));
    let m = HermitianOperator::new(embed(&embedding, &m1, 1.0))?;

    let g = gaussian_matrix(d_eff, d_eff, rng);
    let mut h1 = &g + &g.adjoint();
    let shift = h1.trace() / d_eff as f64;
    for i in 0..d_eff {
        h1[(i, i)] -= shift;
    }
    let h1 = HermitianOperator::new(h1)?.z_normalized()?;
    let h = HermitianOperator::new(embed(&embedding, h1.matrix(), 0.0))?;

    let frozen_unitaries = (0..=p)
        .map(|_| embed(&embedding, &haar_unitary(d_eff, rng), 1.0))
        .collect();

    let local = haar_state(d_eff, rng);
    let mut amps = vec![C64::new(0.0, 0.0); d];
    for (r, a) in amps.iter_mut().enumerate() {
        for (c, v) in local.amplitudes().iter().enumerate() {
            *a += embedding[(r, c)] * v;
        }
    }
    let input_state = StateVector::new(amps)?;

    Ok(SyntheticInstance {
        d,
        d_eff,
        kappa_eff,
        m,
        h,
        frozen_unitaries,
        input_state,
        embedding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    #[test]
    fn spectrum_matches_construction() {
        let mut rng = rng_from_seed(5);
        let inst = make_synthetic(16, 4, 2.0, 3, &mut rng).unwrap();
        let ev = inst.m.eigenvalues_only();
        let mut expected = vec![0.0, 0.5];
        expected.extend(std::iter::repeat_n(1.0, 14));
        for (a, b) in ev.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-8);
        }
        assert_eq!(inst.frozen_unitaries.len(), 4);
    }

    #[test]
    fn frozen_and_generator_respect_the_complement() {
        let mut rng = rng_from_seed(9);
        let inst = make_synthetic(8, 3, 4.0, 2, &mut rng).unwrap();
        let q = inst.subspace_basis();
        let proj = q.matmul_adjoint(&q);
        let comp = &ComplexMatrix::identity(8) - &proj;
        for u in &inst.frozen_unitaries {
            let lhs = u.matmul(&comp);
            assert!(lhs.max_abs_diff(&comp) < 1e-10);
            assert!(u.unitarity_error() < 1e-10);
        }
        assert!(inst.h.matrix().matmul(&comp).max_abs() < 1e-10);
        assert!((inst.h.compress(&q).unwrap().z_factor() - 1.0).abs() < 1e-10);
        assert!(inst.h.trace().abs() < 1e-10);
        let leak = comp.matvec(inst.input_state.amplitudes());
        assert!(leak.iter().map(|z| z.norm_sqr()).sum::<f64>() < 1e-20);
    }

    #[test]
    fn full_dimension_embedding() {
        let mut rng = rng_from_seed(1);
        let inst = make_synthetic(4, 4, 3.0, 1, &mut rng).unwrap();
        let ev = inst.m.eigenvalues_only();
        assert!((ev[1] - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn invalid_parameters_rejected() {
        let mut rng = rng_from_seed(1);
        assert!(make_synthetic(4, 1, 2.0, 1, &mut rng).is_err());
        assert!(make_synthetic(4, 5, 2.0, 1, &mut rng).is_err());
        assert!(make_synthetic(4, 2, 0.5, 1, &mut rng).is_err());
        assert!(make_synthetic(4, 2, 2.0, 0, &mut rng).is_err());
    }
}
