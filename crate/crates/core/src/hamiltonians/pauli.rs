use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOperator, C64, I, ONE, ZERO};

/// Largest register handled densely (d = 4096).
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        let data = match self {
            Pauli::I => vec![ONE, ZERO, ZERO, ONE],
            Pauli::X => vec![ZERO, ONE, ONE, ZERO],
            Pauli::Y => vec![ZERO, -I, I, ZERO],
            Pauli::Z => vec![ONE, ZERO, ZERO, -ONE],
        };
        ComplexMatrix::from_vec(2, 2, data).unwrap()
    }

    /// Action on a single basis bit: `P|b⟩ = phase · |b'⟩`.
    fn act(self, bit: bool) -> (bool, C64) {
        match self {
            Pauli::I => (bit, ONE),
            Pauli::X => (!bit, ONE),
            Pauli::Y => (!bit, if bit { -I } else { I }),
            Pauli::Z => (bit, if bit { -ONE } else { ONE }),
        }
    }
}

impl TryFrom<char> for Pauli {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c {
            'I' | 'i' => Ok(Pauli::I),
            'X' | 'x' => Ok(Pauli::X),
            'Y' | 'y' => Ok(Pauli::Y),
            'Z' | 'z' => Ok(Pauli::Z),
            other => Err(Error::InvalidParameter(format!(
                "unknown Pauli label {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// Real multiple of a tensor product of single-qubit Paulis. Qubit 0 is the
/// leftmost (most significant) tensor factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    pub factors: Vec<Pauli>,
    pub coefficient: f64,
}

impl PauliString {
    pub fn new(factors: Vec<Pauli>, coefficient: f64) -> Self {
        Self {
            factors,
            coefficient,
        }
    }

    /// Identity everywhere except the listed `(qubit, label)` sites.
    pub fn sparse(n_qubits: usize, sites: &[(usize, Pauli)], coefficient: f64) -> Self {
        let mut factors = vec![Pauli::I; n_qubits];
        for &(q, p) in sites {
            factors[q] = p;
        }
        Self::new(factors, coefficient)
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.len()
    }

    /// Adds `coefficient · P` into the dense `acc`.
    pub fn accumulate_into(&self, acc: &mut ComplexMatrix) -> Result<()> {
        let n = self.n_qubits();
        if n > MAX_QUBITS {
            return Err(Error::Guard(format!(
                "{n} qubits exceeds the dense limit of {MAX_QUBITS}"
            )));
        }
        let d = 1usize << n;
        if acc.rows() != d || acc.cols() != d {
            return Err(Error::Dimension("accumulator shape mismatch".into()));
        }
        let coeff = C64::new(self.coefficient, 0.0);
        for col in 0..d {
            let mut row = 0usize;
            let mut phase = coeff;
            for (q, p) in self.factors.iter().enumerate() {
                let shift = n - 1 - q;
                let bit = (col >> shift) & 1 == 1;
                let (out, ph) = p.act(bit);
                phase *= ph;
                row |= (out as usize) << shift;
            }
            acc[(row, col)] += phase;
        }
        Ok(())
    }

    pub fn matrix(&self) -> Result<HermitianOperator> {
        let n = self.n_qubits();
        if n > MAX_QUBITS {
            return Err(Error::Guard(format!(
                "{n} qubits exceeds the dense limit of {MAX_QUBITS}"
            )));
        }
        let d = 1usize << n;
        let mut m = ComplexMatrix::zeros(d, d);
        self.accumulate_into(&mut m)?;
        HermitianOperator::new(m)
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses labels such as `"XIZ"`, coefficient 1.
    fn from_str(s: &str) -> Result<Self> {
        let factors = s.chars().map(Pauli::try_from).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(factors, 1.0))
    }
}

/// Sum of Pauli strings on a common register.
pub fn pauli_sum(n_qubits: usize, terms: &[PauliString]) -> Result<HermitianOperator> {
    if n_qubits > MAX_QUBITS {
        return Err(Error::Guard(format!(
            "{n_qubits} qubits exceeds the dense limit of {MAX_QUBITS}"
        )));
    }
    let d = 1usize << n_qubits;
    let mut m = ComplexMatrix::zeros(d, d);
    for t in terms {
        if t.n_qubits() != n_qubits {
            return Err(Error::Dimension(
                "Pauli strings act on different registers".into(),
            ));
        }
        t.accumulate_into(&mut m)?;
    }
    HermitianOperator::new(m)
}
