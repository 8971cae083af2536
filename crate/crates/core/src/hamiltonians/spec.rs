use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::models::{kitaev8, m_hea, tfi1d, xxz1d, KITAEV_QUBITS};
use super::states::InputState;
use crate::error::Result;
use crate::linalg::{ComplexMatrix, HermitianOperator};

/// Serializable name and parameters of a problem Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Tfi1d { n: usize, g: f64 },
    Xxz1d { n: usize, j_zz: f64 },
    Kitaev8 { j_xy: f64, h: f64 },
    HeaDiag { n: usize },
}

impl ModelSpec {
    pub fn build(&self) -> Result<HermitianOperator> {
        match *self {
            ModelSpec::Tfi1d { n, g } => tfi1d(n, g),
            ModelSpec::Xxz1d { n, j_zz } => xxz1d(n, j_zz),
            ModelSpec::Kitaev8 { j_xy, h } => kitaev8(j_xy, h),
            ModelSpec::HeaDiag { n } => m_hea(n),
        }
    }

    pub fn n_qubits(&self) -> usize {
        match *self {
            ModelSpec::Tfi1d { n, .. } | ModelSpec::Xxz1d { n, .. } | ModelSpec::HeaDiag { n } => n,
            ModelSpec::Kitaev8 { .. } => KITAEV_QUBITS,
        }
    }

    /// Per-model default input state.
    pub fn default_input(&self) -> InputState {
        match self {
            ModelSpec::Xxz1d { .. } => InputState::SingletPairs,
            // For TFI the ansatz conserves the Z-parity, so |+…+⟩ splits evenly
            // across both sectors and never reaches the ground state.
            ModelSpec::Tfi1d { .. } | ModelSpec::Kitaev8 { .. } | ModelSpec::HeaDiag { .. } => {
                InputState::Zero
            }
        }
    }
}

/// Writes a matrix as row-major little-endian `(re, im)` f64 pairs.
pub fn write_matrix_le<W: Write>(m: &ComplexMatrix, mut w: W) -> Result<()> {
    for z in m.data() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Dumps a matrix to `path` in the [`write_matrix_le`] layout.
pub fn dump_matrix(m: &ComplexMatrix, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_matrix_le(m, std::io::BufWriter::new(f))
}

/// Reads a square matrix written by [`write_matrix_le`].
pub fn read_matrix_le(bytes: &[u8]) -> Result<ComplexMatrix> {
    use crate::error::Error;
    use crate::linalg::C64;
    if !bytes.len().is_multiple_of(16) {
        return Err(Error::Dimension(
            "byte length is not a multiple of 16".into(),
        ));
    }
    let count = bytes.len() / 16;
    let n = (count as f64).sqrt().round() as usize;
    if n * n != count {
        return Err(Error::Dimension(format!(
            "{count} entries do not form a square matrix"
        )));
    }
    let f = |i: usize| f64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().unwrap());
    let data = (0..count)
        .map(|k| C64::new(f(2 * k), f(2 * k + 1)))
        .collect();
    ComplexMatrix::from_vec(n, n, data)
}
