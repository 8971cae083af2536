use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{StateVector, C64, ZERO};

/// Named product-structured input states `|Φ⟩` on `n` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputState {
    /// `|0…0⟩`
    Zero,
    /// `|+⟩^{⊗n}`
    Uniform,
    /// `(|01⟩ − |10⟩)/√2` on every even bond `(0,1), (2,3), …`
    SingletPairs,
    /// `|0101…⟩`
    Neel,
}

impl InputState {
    pub fn build(self, n: usize) -> Result<StateVector> {
        let d = 1usize << n;
        match self {
            InputState::Zero => Ok(StateVector::basis(d, 0)),
            InputState::Uniform => Ok(StateVector::uniform(d)),
            InputState::Neel => {
                let idx = (0..n).fold(0usize, |acc, q| (acc << 1) | (q % 2));
                Ok(StateVector::basis(d, idx))
            }
            InputState::SingletPairs => {
                if !n.is_multiple_of(2) {
                    return Err(Error::InvalidParameter(format!(
                        "singlet pairing needs an even qubit count, got {n}"
                    )));
                }
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let pair = StateVector::new(vec![ZERO, C64::new(s, 0.0), C64::new(-s, 0.0), ZERO])?;
                let mut psi = pair.clone();
                for _ in 1..n / 2 {
                    psi = psi.tensor(&pair);
                }
                Ok(psi)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neel_index() {
        let s = InputState::Neel.build(4).unwrap();
        assert!((s.amplitudes()[0b0101].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singlet_pairs_amplitudes() {
        let s = InputState::SingletPairs.build(4).unwrap();
        let a = s.amplitudes();
        assert!((a[0b0101].re - 0.5).abs() < 1e-15);
        assert!((a[0b0110].re + 0.5).abs() < 1e-15);
        assert!((a[0b1010].re - 0.5).abs() < 1e-15);
        assert!(s.norm_error() < 1e-14);
        assert!(InputState::SingletPairs.build(3).is_err());
    }
}
