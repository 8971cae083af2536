use std::sync::{Arc, OnceLock};

use faer::Side;

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Relative Hermiticity tolerance applied on construction.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Ascending eigenvalues with the matching eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Spectrum {
    pub fn eigenvector(&self, i: usize) -> Vec<C64> {
        self.vectors.column(i)
    }

    /// `V diag(f(λ)) V†`
    pub fn apply_function(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let mut scaled = v.clone();
        for c in 0..n {
            let s = f(self.values[c]);
            for r in 0..n {
                scaled[(r, c)] *= s;
            }
        }
        scaled.matmul_adjoint(v)
    }
}

/// Dense Hermitian operator with a lazily computed spectral decomposition.
#[derive(Clone)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    spectrum: Arc<OnceLock<Spectrum>>,
}

impl std::fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HermitianOperator")
            .field("dim", &self.dim())
            .field("matrix", &self.matrix)
            .finish()
    }
}

impl HermitianOperator {
    /// Validates Hermiticity (relative tolerance [`HERMITICITY_TOL`]) and
    /// symmetrizes away the residual.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "Hermitian operator must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::NonFinite("Hermitian operator entries".into()));
        }
        let n = matrix.rows().max(1) as f64;
        // ‖·‖_F/√n lower-bounds ‖·‖_op, so this is at least as strict as an
        // operator-norm test.
        let tolerance = HERMITICITY_TOL * matrix.fro_norm() / n.sqrt();
        let error = matrix.hermiticity_error();
        if error > tolerance {
            return Err(Error::NotHermitian { error, tolerance });
        }
        Ok(Self::from_matrix_symmetrized(matrix))
    }

    fn from_matrix_symmetrized(mut matrix: ComplexMatrix) -> Self {
        let n = matrix.rows();
        for i in 0..n {
            matrix[(i, i)] = C64::new(matrix[(i, i)].re, 0.0);
            for j in i + 1..n {
                let avg = (matrix[(i, j)] + matrix[(j, i)].conj()) * 0.5;
                matrix[(i, j)] = avg;
                matrix[(j, i)] = avg.conj();
            }
        }
        Self {
            matrix,
            spectrum: Arc::new(OnceLock::new()),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_matrix_symmetrized(ComplexMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix_symmetrized(ComplexMatrix::identity(dim))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_matrix_symmetrized(ComplexMatrix::from_real_diagonal(values))
    }

    /// `Σ_i c_i |v_i⟩⟨v_i|` built from orthonormal columns of `vectors`.
    pub fn from_spectrum(values: &[f64], vectors: &ComplexMatrix) -> Result<Self> {
        if vectors.cols() != values.len() {
            return Err(Error::Dimension("eigenvalue count mismatch".into()));
        }
        let mut scaled = vectors.clone();
        for c in 0..values.len() {
            for r in 0..vectors.rows() {
                scaled[(r, c)] *= values[c];
            }
        }
        Self::new(scaled.matmul_adjoint(vectors))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Ascending eigendecomposition, computed once and cached.
    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            eig_hermitian_raw(&self.matrix).expect("Hermitian eigendecomposition failed")
        })
    }

    pub fn try_spectrum(&self) -> Result<&Spectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = eig_hermitian_raw(&self.matrix)?;
        Ok(self.spectrum.get_or_init(|| s))
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum().values
    }

    /// Eigenvalues only; does not populate the cache.
    pub fn eigenvalues_only(&self) -> Vec<f64> {
        if let Some(s) = self.spectrum.get() {
            return s.values.clone();
        }
        if self.dim() == 0 {
            return Vec::new();
        }
        self.matrix
            .to_faer()
            .self_adjoint_eigenvalues(Side::Lower)
            .expect("Hermitian eigenvalue computation failed")
    }

    /// `exp(−iθH)`
    pub fn unitary_exp(&self, theta: f64) -> ComplexMatrix {
        if theta == 0.0 {
            return ComplexMatrix::identity(self.dim());
        }
        self.spectrum()
            .apply_function(|l| C64::from_polar(1.0, -theta * l))
    }

    /// Largest absolute eigenvalue.
    pub fn op_norm(&self) -> f64 {
        let ev = self.eigenvalues_only();
        ev.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `tr(H²)`
    pub fn trace_of_square(&self) -> f64 {
        // H Hermitian: tr(H²) = Σ |h_ij|²
        self.matrix.fro_norm().powi(2)
    }

    /// Haar normalization factor `Z(H, d) = tr(H²)/(d²−1)`.
    pub fn z_factor(&self) -> f64 {
        let d = self.dim() as f64;
        self.trace_of_square() / (d * d - 1.0)
    }

    /// Rescaled copy with `Z(H, d) = 1`.
    pub fn z_normalized(&self) -> Result<Self> {
        let z = self.z_factor();
        if z <= 0.0 || !z.is_finite() {
            return Err(Error::Degenerate("cannot normalize a zero operator".into()));
        }
        Ok(self.scaled(1.0 / z.sqrt()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_matrix_symmetrized(self.matrix.scale_real(s))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension("operator dimensions differ".into()));
        }
        Ok(Self::from_matrix_symmetrized(&self.matrix + &other.matrix))
    }

    /// `U H U†`
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != self.dim() || u.cols() != self.dim() {
            return Err(Error::Dimension(
                "conjugating unitary has wrong shape".into(),
            ));
        }
        Self::new(u.matmul(&self.matrix).matmul_adjoint(u))
    }

    /// `Q† H Q` for a `d × k` isometry `Q`.
    pub fn compress(&self, q: &ComplexMatrix) -> Result<Self> {
        if q.rows() != self.dim() {
            return Err(Error::Dimension(
                "compression basis has wrong row count".into(),
            ));
        }
        Self::new(q.adjoint().matmul(&self.matrix).matmul(q))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::from_matrix_symmetrized(self.matrix.kron(&other.matrix))
    }

    /// `⟨v|H|v⟩`, real part.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let hv = self.matrix.matvec(v);
        v.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn is_traceless(&self, tol: f64) -> bool {
        self.trace().abs() <= tol
    }
}

/// Eigendecomposition of a Hermitian matrix (ascending eigenvalues).
pub fn eig_hermitian_raw(a: &ComplexMatrix) -> Result<Spectrum> {
    let n = a.rows();
    if n == 0 {
        return Ok(Spectrum {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let evd = a
        .to_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let mut values: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let mut vectors = ComplexMatrix::from_faer(evd.U());
    // faer documents non-decreasing order; enforce it regardless.
    if values.windows(2).any(|w| w[0] > w[1]) {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        values = order.iter().map(|&i| values[i]).collect();
        vectors = ComplexMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    }
    if values.iter().any(|v| !v.is_finite()) || !vectors.is_finite() {
        return Err(Error::NonFinite("eigendecomposition output".into()));
    }
    Ok(Spectrum { values, vectors })
}

/// Eigendecomposition of a validated Hermitian operator.
pub fn eig_hermitian(a: &HermitianOperator) -> Result<(Vec<f64>, ComplexMatrix)> {
    let s = a.try_spectrum()?;
    Ok((s.values.clone(), s.vectors.clone()))
}

impl Default for HermitianOperator {
    fn default() -> Self {
        Self::zeros(0)
    }
}
