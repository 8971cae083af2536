use crate::ansatz::{Ansatz, AnyAnsatz};
use crate::error::{Error, Result};
use crate::linalg::{inner, ComplexMatrix, HermitianOperator, StateVector, C64};

/// Relative gap below which the two lowest eigenvalues count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Problem triplet `(M, |Φ⟩, U)` with the exact ground space of `M`.
#[derive(Debug, Clone)]
pub struct VqeInstance<A: Ansatz = AnyAnsatz> {
    m: HermitianOperator,
    input_state: StateVector,
    ansatz: A,
    spectrum: Vec<f64>,
    ground_space: Vec<Vec<C64>>,
}

/// Loss, output state and gradient at one parameter point.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub psi: Vec<C64>,
    pub loss: f64,
    pub gradient: Vec<f64>,
}

impl<A: Ansatz> VqeInstance<A> {
    pub fn new(m: HermitianOperator, input_state: StateVector, ansatz: A) -> Result<Self> {
        let d = m.dim();
        if input_state.dim() != d || ansatz.dim() != d {
            return Err(Error::Dimension(format!(
                "objective has dimension {d}, input state {}, ansatz {}",
                input_state.dim(),
                ansatz.dim()
            )));
        }
        let spec = m.try_spectrum()?;
        let spectrum = spec.values.clone();
        let scale = spectrum.iter().map(|x| x.abs()).fold(1.0, f64::max);
        let tol = DEGENERACY_TOL * scale;
        let ground_space = (0..d)
            .take_while(|&i| spectrum[i] - spectrum[0] <= tol)
            .map(|i| spec.eigenvector(i))
            .collect();
        Ok(Self {
            m,
            input_state,
            ansatz,
            spectrum,
            ground_space,
        })
    }

    pub fn objective(&self) -> &HermitianOperator {
        &self.m
    }

    pub fn input_state(&self) -> &StateVector {
        &self.input_state
    }

    pub fn ansatz(&self) -> &A {
        &self.ansatz
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn n_params(&self) -> usize {
        self.ansatz.n_params()
    }

    /// Ascending eigenvalues of `M`.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// Orthonormal basis of the lowest eigenspace.
    pub fn ground_space(&self) -> &[Vec<C64>] {
        &self.ground_space
    }

    pub fn is_degenerate(&self) -> bool {
        self.ground_space.len() > 1
    }

    pub fn ground_state(&self) -> StateVector {
        StateVector::new(self.ground_space[0].clone()).expect("eigenvector is normalized")
    }

    /// `(λ_d − λ_1)/(λ_2 − λ_1)`; infinite when the ground space is degenerate.
    pub fn kappa(&self) -> f64 {
        spectral_ratio(&self.spectrum)
    }

    /// `1 − ‖P_ground ψ‖²` for a normalized `ψ`.
    pub fn overlap_error(&self, psi: &[C64]) -> f64 {
        let captured: f64 = self
            .ground_space
            .iter()
            .map(|g| inner(g, psi).norm_sqr())
            .sum();
        (1.0 - captured).max(0.0)
    }

    /// `U(θ)|Φ⟩` as raw amplitudes.
    pub fn output(&self, theta: &[f64]) -> Result<Vec<C64>> {
        self.ansatz.circuit().check_theta(theta)?;
        Ok(self
            .ansatz
            .circuit()
            .apply_to(theta, self.input_state.amplitudes()))
    }

    /// `L(θ) = ⟨Φ|U(θ)† M U(θ)|Φ⟩`
    pub fn loss(&self, theta: &[f64]) -> Result<f64> {
        let psi = self.output(theta)?;
        Ok(self.m.expectation(&psi))
    }

    /// Analytic gradient by a reverse (adjoint) sweep: `∂L/∂θ_j = 2 Im⟨b|G_j|a⟩`
    /// with `a = S_j†|Ψ⟩`, `b = S_j† M|Ψ⟩` and `S_j` the gates after rotation `j`.
    /// This equals `i tr([M, |Ψ⟩⟨Ψ|] S_j G_j S_j†)` and is real by construction.
    pub fn analytic_gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        Ok(self.evaluate(theta)?.gradient)
    }

    /// Loss, state and gradient in one forward and one reverse pass.
    pub fn evaluate(&self, theta: &[f64]) -> Result<Evaluation> {
        let c = self.ansatz.circuit();
        let psi = self.output(theta)?;
        let mut a = psi.clone();
        let mut b = self.m.matrix().matvec(&psi);
        let loss = inner(&psi, &b).re;
        let mut gradient = vec![0.0; c.n_params()];
        let mut ga = vec![C64::new(0.0, 0.0); a.len()];
        for i in (0..c.gates().len()).rev() {
            if let crate::ansatz::Gate::Rotation { generator, param } = c.gates()[i] {
                c.generator(generator).matrix().matvec_into(&a, &mut ga);
                gradient[param] = 2.0 * inner(&b, &ga).im;
            }
            if i > 0 {
                c.apply_gate_inverse(i, theta, &mut a);
                c.apply_gate_inverse(i, theta, &mut b);
            }
        }
        if !loss.is_finite() || gradient.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("loss or gradient".into()));
        }
        Ok(Evaluation {
            psi,
            loss,
            gradient,
        })
    }

    /// Gradient from the explicit commutator trace `i tr([M, ρ_Ψ] H_l)` with
    /// `H_l` built from suffix unitaries. Checks that the imaginary residue is
    /// at most `1e−8` before discarding it.
    pub fn commutator_gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let psi = self.output(theta)?;
        let rho = crate::linalg::outer(&psi, &psi);
        let mm = self.m.matrix();
        let comm = &mm.matmul(&rho) - &rho.matmul(mm);
        let suffix = self.ansatz.suffix_unitaries(theta)?;
        let mut out = Vec::with_capacity(suffix.len());
        for (j, s) in suffix.iter().enumerate() {
            let g = self.ansatz.generator_of_param(j).matrix();
            let hl = s.matmul(g).matmul_adjoint(s);
            let val = C64::new(0.0, 1.0) * trace_of_product(&comm, &hl);
            if val.im.abs() > 1e-8 {
                return Err(Error::NonFinite(format!(
                    "gradient component {j} has imaginary residue {:.3e}",
                    val.im
                )));
            }
            out.push(val.re);
        }
        Ok(out)
    }
}

/// `tr(AB)` without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.rows();
    let mut t = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.cols() {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}

/// `(λ_d − λ_1)/(λ_2 − λ_1)` of an ascending list; `+∞` when `λ_2 = λ_1`
/// within `1e−12` (relative to the spectral width).
pub fn spectral_ratio(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return f64::INFINITY;
    }
    let width = values[values.len() - 1] - values[0];
    let gap = values[1] - values[0];
    if gap <= 1e-12 * width.max(1.0) {
        f64::INFINITY
    } else {
        width / gap
    }
}
