use super::matrix::{inner, norm2, ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Normalizes `amplitudes`; rejects the zero vector and non-finite input.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm2(&amplitudes);
        if !n.is_finite() {
            return Err(Error::NonFinite("state amplitudes".into()));
        }
        if n == 0.0 {
            return Err(Error::Degenerate("zero state vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|a| a / n).collect(),
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    /// `(1, 1, …, 1)/√d`
    pub fn uniform(dim: usize) -> Self {
        let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            amplitudes: vec![a; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn inner(&self, other: &Self) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// `|⟨self|other⟩|²`
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `U|ψ⟩`, renormalized.
    pub fn evolve(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.cols() != self.dim() {
            return Err(Error::Dimension(
                "unitary does not match state dimension".into(),
            ));
        }
        Self::new(u.matvec(&self.amplitudes))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Self { amplitudes }
    }

    pub fn projector(&self) -> ComplexMatrix {
        super::matrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn norm_error(&self) -> f64 {
        (norm2(&self.amplitudes) - 1.0).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_on_construction() {
        let s = StateVector::new(vec![C64::new(3.0, 0.0), C64::new(0.0, 4.0)]).unwrap();
        assert!(s.norm_error() < 1e-15);
        assert!((s.amplitudes()[0].re - 0.6).abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_vector() {
        assert!(StateVector::new(vec![ZERO; 3]).is_err());
    }

    #[test]
    fn uniform_and_basis_overlap() {
        let u = StateVector::uniform(4);
        let b = StateVector::basis(4, 2);
        assert!((u.fidelity(&b) - 0.25).abs() < 1e-15);
    }
}
