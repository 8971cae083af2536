//! Fully- and partially-trainable ansatz circuits as gate sequences over a
//! shared generator list.

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{GeneratorSet, GeneratorSpec};
use crate::linalg::{haar_unitary, ComplexMatrix, HermitianOperator, StateVector, C64};
use crate::seed::rng_from_seed;

/// Default depth of the generator random walk approximating subgroup Haar.
pub const DEFAULT_L_SAMPLE: usize = 20;

/// One circuit element, in application order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    /// Index into the circuit's fixed unitaries.
    Fixed(usize),
    /// `exp(−iθ_param H_generator)`
    Rotation { generator: usize, param: usize },
}

/// Applies `exp(−iθH)` to `v` in place through the cached spectrum of `h`.
pub fn apply_rotation(h: &HermitianOperator, theta: f64, v: &mut [C64]) {
    if theta == 0.0 {
        return;
    }
    let s = h.spectrum();
    let d = v.len();
    let vecs = &s.vectors;
    let mut w = vec![C64::new(0.0, 0.0); d];
    for (r, &vr) in v.iter().enumerate() {
        if vr == C64::new(0.0, 0.0) {
            continue;
        }
        let row = vecs.row(r);
        for (c, wc) in w.iter_mut().enumerate() {
            *wc += row[c].conj() * vr;
        }
    }
    for (c, wc) in w.iter_mut().enumerate() {
        *wc *= C64::from_polar(1.0, -theta * s.values[c]);
    }
    for (r, vr) in v.iter_mut().enumerate() {
        let row = vecs.row(r);
        *vr = row.iter().zip(&w).map(|(a, b)| a * b).sum();
    }
}

/// `exp(−iθH) · A` through the cached spectrum of `h`.
pub fn rotate_matrix(h: &HermitianOperator, theta: f64, a: &ComplexMatrix) -> ComplexMatrix {
    if theta == 0.0 {
        return a.clone();
    }
    let s = h.spectrum();
    let mut w = s.vectors.adjoint().matmul(a);
    for r in 0..w.rows() {
        let ph = C64::from_polar(1.0, -theta * s.values[r]);
        for z in w.row_mut(r) {
            *z *= ph;
        }
    }
    s.vectors.matmul(&w)
}

/// Gate sequence with its generators and fixed unitaries.
#[derive(Debug, Clone)]
pub struct Circuit {
    dim: usize,
    generators: Vec<HermitianOperator>,
    fixed: Arc<Vec<ComplexMatrix>>,
    gates: Vec<Gate>,
    rotation_gate: Vec<usize>,
}

impl Circuit {
    fn new(
        generators: Vec<HermitianOperator>,
        fixed: Vec<ComplexMatrix>,
        gates: Vec<Gate>,
    ) -> Result<Self> {
        let dim = generators
            .first()
            .map(HermitianOperator::dim)
            .ok_or_else(|| Error::InvalidParameter("circuit needs a generator".into()))?;
        for u in &fixed {
            if u.rows() != dim || u.cols() != dim {
                return Err(Error::Dimension("fixed unitary has the wrong shape".into()));
            }
        }
        let n_params = gates
            .iter()
            .filter(|g| matches!(g, Gate::Rotation { .. }))
            .count();
        let mut rotation_gate = vec![usize::MAX; n_params];
        for (i, g) in gates.iter().enumerate() {
            if let Gate::Rotation { param, .. } = *g {
                rotation_gate[param] = i;
            }
        }
        if rotation_gate.contains(&usize::MAX) {
            return Err(Error::InvalidParameter(
                "parameters must be numbered densely".into(),
            ));
        }
        for h in &generators {
            h.try_spectrum()?;
        }
        Ok(Self {
            dim,
            generators,
            fixed: Arc::new(fixed),
            gates,
            rotation_gate,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_params(&self) -> usize {
        self.rotation_gate.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn generator(&self, k: usize) -> &HermitianOperator {
        &self.generators[k]
    }

    pub fn fixed(&self, i: usize) -> &ComplexMatrix {
        &self.fixed[i]
    }

    /// Generator acted on by parameter `j`.
    pub fn generator_of_param(&self, j: usize) -> &HermitianOperator {
        match self.gates[self.rotation_gate[j]] {
            Gate::Rotation { generator, .. } => &self.generators[generator],
            Gate::Fixed(_) => unreachable!(),
        }
    }

    pub fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(Error::Dimension(format!(
                "expected {} parameters, got {}",
                self.n_params(),
                theta.len()
            )));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("parameter vector".into()));
        }
        Ok(())
    }

    /// Applies gate `i` to the vector in place.
    pub fn apply_gate(&self, i: usize, theta: &[f64], v: &mut Vec<C64>) {
        match self.gates[i] {
            Gate::Fixed(f) => *v = self.fixed[f].matvec(v),
            Gate::Rotation { generator, param } => {
                apply_rotation(&self.generators[generator], theta[param], v)
            }
        }
    }

    /// Applies the inverse of gate `i` to the vector in place.
    pub fn apply_gate_inverse(&self, i: usize, theta: &[f64], v: &mut Vec<C64>) {
        match self.gates[i] {
            Gate::Fixed(f) => {
                let mut out = vec![C64::new(0.0, 0.0); v.len()];
                self.fixed[f].adjoint_matvec_into(v, &mut out);
                *v = out;
            }
            Gate::Rotation { generator, param } => {
                apply_rotation(&self.generators[generator], -theta[param], v)
            }
        }
    }

    fn apply_gate_matrix(&self, i: usize, theta: &[f64], a: &ComplexMatrix) -> ComplexMatrix {
        match self.gates[i] {
            Gate::Fixed(f) => self.fixed[f].matmul(a),
            Gate::Rotation { generator, param } => {
                rotate_matrix(&self.generators[generator], theta[param], a)
            }
        }
    }

    /// Product of gates `range` (application order), as a matrix.
    pub fn product(&self, theta: &[f64], range: std::ops::Range<usize>) -> ComplexMatrix {
        let mut u = ComplexMatrix::identity(self.dim);
        for i in range {
            u = self.apply_gate_matrix(i, theta, &u);
        }
        u
    }

    /// `U(θ)|v⟩` without forming `U(θ)`.
    pub fn apply_to(&self, theta: &[f64], v: &[C64]) -> Vec<C64> {
        let mut out = v.to_vec();
        for i in 0..self.gates.len() {
            self.apply_gate(i, theta, &mut out);
        }
        out
    }

    /// Index of the rotation gate carrying parameter `j`.
    pub fn rotation_gate(&self, j: usize) -> usize {
        self.rotation_gate[j]
    }
}

/// Common interface of both ansatz families.
pub trait Ansatz: Send + Sync {
    fn circuit(&self) -> &Circuit;

    fn n_params(&self) -> usize {
        self.circuit().n_params()
    }

    fn dim(&self) -> usize {
        self.circuit().dim()
    }

    /// `U(θ)` as an explicit matrix.
    fn apply(&self, theta: &[f64]) -> Result<ComplexMatrix> {
        let c = self.circuit();
        c.check_theta(theta)?;
        Ok(c.product(theta, 0..c.gates().len()))
    }

    /// `U(θ)|Φ⟩`, renormalized.
    fn output_state(&self, theta: &[f64], phi: &StateVector) -> Result<StateVector> {
        let c = self.circuit();
        c.check_theta(theta)?;
        if phi.dim() != c.dim() {
            return Err(Error::Dimension("input state dimension mismatch".into()));
        }
        StateVector::new(c.apply_to(theta, phi.amplitudes()))
    }

    /// For each parameter `j`, the product of all gates from its rotation
    /// to the end of the circuit. One right-to-left sweep.
    fn suffix_unitaries(&self, theta: &[f64]) -> Result<Vec<ComplexMatrix>> {
        let c = self.circuit();
        c.check_theta(theta)?;
        let n = c.gates().len();
        let mut out = vec![ComplexMatrix::zeros(0, 0); c.n_params()];
        // acc = G_{n−1} ⋯ G_i, grown by right-multiplying each earlier gate.
        let mut acc = ComplexMatrix::identity(c.dim());
        for i in (0..n).rev() {
            let g = c.product(theta, i..i + 1);
            acc = acc.matmul(&g);
            if let Gate::Rotation { param, .. } = c.gates()[i] {
                out[param] = acc.clone();
            }
        }
        Ok(out)
    }

    /// Product of the gates preceding parameter `j`'s rotation, so that
    /// `apply(θ) = suffix_unitaries(θ)[j] · prefix_unitary(θ, j)`.
    fn prefix_unitary(&self, theta: &[f64], j: usize) -> Result<ComplexMatrix> {
        let c = self.circuit();
        c.check_theta(theta)?;
        if j >= c.n_params() {
            return Err(Error::InvalidParameter(format!(
                "parameter index {j} out of range"
            )));
        }
        Ok(c.product(theta, 0..c.rotation_gate(j)))
    }

    /// Generator `H_j` attached to parameter `j`.
    fn generator_of_param(&self, j: usize) -> &HermitianOperator {
        self.circuit().generator_of_param(j)
    }

    /// Z-factor used to normalize the `Y` operator.
    fn z_of_param(&self, j: usize) -> f64 {
        self.generator_of_param(j).z_factor()
    }
}

/// `U(θ) = Π_l Π_k exp(−iθ_{l,k} H_k)`, parameter index `l·K + k`. Layer 0 and
/// generator 0 act first.
#[derive(Debug, Clone)]
pub struct FullyTrainableAnsatz {
    circuit: Circuit,
    layers: usize,
    n_generators: usize,
}

impl FullyTrainableAnsatz {
    pub fn new(gens: &GeneratorSet, layers: usize) -> Result<Self> {
        if layers == 0 {
            return Err(Error::InvalidParameter("need at least one layer".into()));
        }
        let k = gens.len();
        let gates = (0..layers)
            .flat_map(|l| {
                (0..k).map(move |g| Gate::Rotation {
                    generator: g,
                    param: l * k + g,
                })
            })
            .collect();
        let circuit = Circuit::new(gens.generators().to_vec(), Vec::new(), gates)?;
        Ok(Self {
            circuit,
            layers,
            n_generators: k,
        })
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn n_generators(&self) -> usize {
        self.n_generators
    }

    /// Flat index of `θ_{l,k}`.
    pub fn param_index(&self, layer: usize, k: usize) -> usize {
        layer * self.n_generators + k
    }
}

impl Ansatz for FullyTrainableAnsatz {
    fn circuit(&self) -> &Circuit {
        &self.circuit
    }
}

/// `U(θ) = U_p e^{−iθ_p H} ⋯ U_1 e^{−iθ_1 H} U_0` with frozen `U_l`.
#[derive(Debug, Clone)]
pub struct PartiallyTrainableAnsatz {
    circuit: Circuit,
    h_index: usize,
    l_sample: usize,
}

impl PartiallyTrainableAnsatz {
    /// `frozen` lists `U_0, U_1, …, U_p` in application order.
    pub fn from_parts(h: HermitianOperator, frozen: Vec<ComplexMatrix>) -> Result<Self> {
        if frozen.len() < 2 {
            return Err(Error::InvalidParameter(
                "need p + 1 ≥ 2 frozen unitaries".into(),
            ));
        }
        for (l, u) in frozen.iter().enumerate() {
            let err = u.unitarity_error();
            if err > 1e-10 * (u.rows() as f64).sqrt().max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "frozen unitary {l} deviates from unitarity by {err:.3e}"
                )));
            }
        }
        let p = frozen.len() - 1;
        let mut gates = Vec::with_capacity(2 * p + 1);
        gates.push(Gate::Fixed(0));
        for l in 0..p {
            gates.push(Gate::Rotation {
                generator: 0,
                param: l,
            });
            gates.push(Gate::Fixed(l + 1));
        }
        let circuit = Circuit::new(vec![h], frozen, gates)?;
        Ok(Self {
            circuit,
            h_index: 0,
            l_sample: 0,
        })
    }

    /// Trainable generator `H`.
    pub fn trainable(&self) -> &HermitianOperator {
        self.circuit.generator(0)
    }

    pub fn h_index(&self) -> usize {
        self.h_index
    }

    pub fn l_sample(&self) -> usize {
        self.l_sample
    }

    /// Frozen unitaries `U_0, …, U_p` in application order.
    pub fn frozen(&self) -> &[ComplexMatrix] {
        &self.circuit.fixed
    }
}

impl Ansatz for PartiallyTrainableAnsatz {
    fn circuit(&self) -> &Circuit {
        &self.circuit
    }
}

/// Walk over the generator group: `L` layers of `Π_k exp(−iφ H_k)` with
/// `φ ~ U[0, 2π)`, generator 0 and layer 0 applied first.
pub fn subgroup_haar_sample<R: Rng + ?Sized>(
    gens: &GeneratorSet,
    l_sample: usize,
    rng: &mut R,
) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(gens.dim());
    for _ in 0..l_sample {
        for h in gens.generators() {
            let phi = rng.random_range(0.0..TAU);
            u = rotate_matrix(h, phi, &u);
        }
    }
    u
}

/// Applies a fresh [`subgroup_haar_sample`] draw to `v` without forming the
/// matrix. Consumes the RNG identically.
pub fn subgroup_walk_state<R: Rng + ?Sized>(
    gens: &GeneratorSet,
    l_sample: usize,
    rng: &mut R,
    v: &mut [C64],
) {
    for _ in 0..l_sample {
        for h in gens.generators() {
            let phi = rng.random_range(0.0..TAU);
            apply_rotation(h, phi, v);
        }
    }
}

/// Draws a frozen unitary: direct SU(d) Haar when the set is flagged
/// universal, otherwise the generator walk.
pub fn sample_frozen<R: Rng + ?Sized>(
    gens: &GeneratorSet,
    l_sample: usize,
    rng: &mut R,
) -> ComplexMatrix {
    if gens.is_universal() {
        haar_unitary(gens.dim(), rng)
    } else {
        subgroup_haar_sample(gens, l_sample, rng)
    }
}

/// Samples `U_0, …, U_p` independently (in that order) and builds the ansatz
/// with trainable generator `gens[h_index]`.
pub fn build_partially_trainable<R: Rng + ?Sized>(
    gens: &GeneratorSet,
    h_index: usize,
    p: usize,
    l_sample: usize,
    rng: &mut R,
) -> Result<PartiallyTrainableAnsatz> {
    if h_index >= gens.len() {
        return Err(Error::InvalidParameter(format!(
            "generator index {h_index} out of range for a set of {}",
            gens.len()
        )));
    }
    if p == 0 {
        return Err(Error::InvalidParameter("p must be at least 1".into()));
    }
    gens.warm_spectra()?;
    let frozen = (0..=p)
        .map(|_| sample_frozen(gens, l_sample, rng))
        .collect();
    let mut a = PartiallyTrainableAnsatz::from_parts(gens.generator(h_index).clone(), frozen)?;
    a.h_index = h_index;
    a.l_sample = l_sample;
    Ok(a)
}

/// Either ansatz family behind one type.
#[derive(Debug, Clone)]
pub enum AnyAnsatz {
    Fully(FullyTrainableAnsatz),
    Partially(PartiallyTrainableAnsatz),
}

impl Ansatz for AnyAnsatz {
    fn circuit(&self) -> &Circuit {
        match self {
            AnyAnsatz::Fully(a) => a.circuit(),
            AnyAnsatz::Partially(a) => a.circuit(),
        }
    }
}

impl From<FullyTrainableAnsatz> for AnyAnsatz {
    fn from(a: FullyTrainableAnsatz) -> Self {
        AnyAnsatz::Fully(a)
    }
}

impl From<PartiallyTrainableAnsatz> for AnyAnsatz {
    fn from(a: PartiallyTrainableAnsatz) -> Self {
        AnyAnsatz::Partially(a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    FullyTrainable,
    PartiallyTrainable,
}

/// Reproducible construction recipe: rebuilding with the same fields yields
/// bit-identical frozen unitaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzRecipe {
    pub kind: AnsatzKind,
    pub generators: GeneratorSpec,
    /// Trainable parameter count (`p` for partially-trainable, `L·K` for
    /// fully-trainable).
    pub p: usize,
    #[serde(default)]
    pub h_index: usize,
    #[serde(default = "default_l_sample")]
    pub l_sample: usize,
    pub seed: u64,
    #[serde(default)]
    pub universal: bool,
}

fn default_l_sample() -> usize {
    DEFAULT_L_SAMPLE
}

impl AnsatzRecipe {
    pub fn build(&self) -> Result<AnyAnsatz> {
        let gens = GeneratorSet::from_spec(&self.generators)?.with_universal(self.universal);
        self.build_with(&gens)
    }

    /// Builds against an already constructed generator set.
    pub fn build_with(&self, gens: &GeneratorSet) -> Result<AnyAnsatz> {
        match self.kind {
            AnsatzKind::FullyTrainable => {
                let k = gens.len();
                if self.p == 0 || !self.p.is_multiple_of(k) {
                    return Err(Error::InvalidParameter(format!(
                        "fully-trainable parameter count {} is not a positive multiple of K = {k}",
                        self.p
                    )));
                }
                Ok(FullyTrainableAnsatz::new(gens, self.p / k)?.into())
            }
            AnsatzKind::PartiallyTrainable => {
                let mut rng = rng_from_seed(self.seed);
                Ok(
                    build_partially_trainable(gens, self.h_index, self.p, self.l_sample, &mut rng)?
                        .into(),
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_state;

    fn slow_product(a: &PartiallyTrainableAnsatz, theta: &[f64]) -> ComplexMatrix {
        let h = a.trainable();
        let mut u = a.frozen()[0].clone();
        for (l, t) in theta.iter().enumerate() {
            u = h.unitary_exp(*t).matmul(&u);
            u = a.frozen()[l + 1].matmul(&u);
        }
        u
    }

    #[test]
    fn rotation_matches_matrix_exponential() {
        let gens = GeneratorSet::tfi2(3).unwrap();
        let mut rng = rng_from_seed(2);
        let psi = haar_state(8, &mut rng);
        let mut v = psi.amplitudes().to_vec();
        apply_rotation(gens.generator(0), 0.37, &mut v);
        let want = gens.generator(0).unitary_exp(0.37).matvec(psi.amplitudes());
        let err: f64 = v
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn fully_trainable_identity_at_zero() {
        let gens = GeneratorSet::tfi3(4).unwrap();
        let a = FullyTrainableAnsatz::new(&gens, 3).unwrap();
        assert_eq!(a.n_params(), 9);
        let u = a.apply(&[0.0; 9]).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(16)) < 1e-14);
    }

    #[test]
    fn fully_trainable_order() {
        let gens = GeneratorSet::tfi2(2).unwrap();
        let a = FullyTrainableAnsatz::new(&gens, 2).unwrap();
        let th = [0.1, 0.2, 0.3, 0.4];
        let e = |k: usize, t: f64| gens.generator(k).unitary_exp(t);
        let want = e(1, 0.4)
            .matmul(&e(0, 0.3))
            .matmul(&e(1, 0.2))
            .matmul(&e(0, 0.1));
        assert!(a.apply(&th).unwrap().max_abs_diff(&want) < 1e-12);
        assert_eq!(a.param_index(1, 0), 2);
    }

    #[test]
    fn partially_trainable_matches_naive_product() {
        let gens = GeneratorSet::tfi2(4).unwrap();
        let mut rng = rng_from_seed(7);
        let a = build_partially_trainable(&gens, 0, 30, DEFAULT_L_SAMPLE, &mut rng).unwrap();
        let theta: Vec<f64> = (0..30).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fast = a.apply(&theta).unwrap();
        assert!(fast.max_abs_diff(&slow_product(&a, &theta)) < 1e-10);
        assert!(fast.unitarity_error() < 1e-10);
    }

    #[test]
    fn suffix_and_prefix_split() {
        let gens = GeneratorSet::tfi3(4).unwrap();
        let mut rng = rng_from_seed(8);
        let a = build_partially_trainable(&gens, 1, 5, 4, &mut rng).unwrap();
        let theta: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let full = a.apply(&theta).unwrap();
        let suffix = a.suffix_unitaries(&theta).unwrap();
        for (j, s) in suffix.iter().enumerate() {
            let prod = s.matmul(&a.prefix_unitary(&theta, j).unwrap());
            assert!(prod.max_abs_diff(&full) < 1e-10);
            assert!(s.unitarity_error() < 1e-10);
        }
        let last = a.frozen()[5].matmul(&a.trainable().unitary_exp(theta[4]));
        assert!(suffix[4].max_abs_diff(&last) < 1e-12);
        let head = suffix[0].matmul(&a.frozen()[0]);
        assert!(head.max_abs_diff(&full) < 1e-10);
    }

    #[test]
    fn zero_layer_walk_is_identity() {
        let gens = GeneratorSet::tfi2(2).unwrap();
        let mut rng = rng_from_seed(1);
        let u = subgroup_haar_sample(&gens, 0, &mut rng);
        assert_eq!(u, ComplexMatrix::identity(4));
    }

    #[test]
    fn state_walk_matches_matrix_walk() {
        let gens = GeneratorSet::xxz4(4).unwrap();
        let phi = StateVector::basis(16, 3);
        let u = subgroup_haar_sample(&gens, 5, &mut rng_from_seed(11));
        let mut v = phi.amplitudes().to_vec();
        subgroup_walk_state(&gens, 5, &mut rng_from_seed(11), &mut v);
        let want = u.matvec(phi.amplitudes());
        let err: f64 = v
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn theta_length_checked() {
        let gens = GeneratorSet::tfi2(2).unwrap();
        let a = FullyTrainableAnsatz::new(&gens, 1).unwrap();
        assert!(a.apply(&[0.0]).is_err());
        let phi = StateVector::basis(4, 0);
        assert!(a.output_state(&[0.0; 3], &phi).is_err());
    }

    #[test]
    fn recipe_is_deterministic() {
        let recipe = AnsatzRecipe {
            kind: AnsatzKind::PartiallyTrainable,
            generators: GeneratorSpec::Tfi2 { n: 3 },
            p: 4,
            h_index: 0,
            l_sample: 6,
            seed: 99,
            universal: false,
        };
        let a = recipe.build().unwrap();
        let b = recipe.build().unwrap();
        let th = [0.3, -0.1, 0.2, 0.5];
        assert_eq!(a.apply(&th).unwrap(), b.apply(&th).unwrap());
        let json = serde_json::to_string(&recipe).unwrap();
        assert_eq!(serde_json::from_str::<AnsatzRecipe>(&json).unwrap(), recipe);
    }

    #[test]
    fn universal_fast_path_draws_su_d() {
        let gens = GeneratorSet::full_su(2).unwrap();
        let mut rng = rng_from_seed(4);
        let a = build_partially_trainable(&gens, 0, 2, DEFAULT_L_SAMPLE, &mut rng).unwrap();
        for u in a.frozen() {
            assert!((u.determinant() - C64::new(1.0, 0.0)).norm() < 1e-9);
        }
    }
}
