use serde::{Deserialize, Serialize};

use super::models::{bond_terms, check_even, check_register, field_terms, Bonds};
use super::models::{KITAEV_QUBITS, KITAEV_X_BONDS, KITAEV_Y_BONDS, KITAEV_Z_BONDS};
use super::pauli::{pauli_sum, Pauli, PauliString};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOperator};

/// Tolerance for the normalization and tracelessness checks.
pub const GENERATOR_TOL: f64 = 1e-8;

/// Ordered generator list `A = {H_1, …, H_K}` on a common space.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    generators: Vec<HermitianOperator>,
    labels: Vec<String>,
    normalized: bool,
    universal: bool,
}

impl GeneratorSet {
    /// Validates a shared dimension and tracelessness. Generators are kept
    /// as given; call [`GeneratorSet::normalize`] to rescale.
    pub fn new(generators: Vec<HermitianOperator>, labels: Vec<String>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidParameter("generator set is empty".into()));
        }
        if labels.len() != generators.len() {
            return Err(Error::InvalidParameter(
                "one label per generator required".into(),
            ));
        }
        let d = generators[0].dim();
        for (h, label) in generators.iter().zip(&labels) {
            if h.dim() != d {
                return Err(Error::Dimension(format!(
                    "generator {label} has dimension {} but the set uses {d}",
                    h.dim()
                )));
            }
            if !h.is_traceless(GENERATOR_TOL * d as f64) {
                return Err(Error::InvalidParameter(format!(
                    "generator {label} is not traceless (tr = {:.3e})",
                    h.trace()
                )));
            }
        }
        let normalized = generators
            .iter()
            .all(|h| (h.z_factor() - 1.0).abs() <= GENERATOR_TOL);
        Ok(Self {
            generators,
            labels,
            normalized,
            universal: false,
        })
    }

    /// Rescales every generator to `Z(H_k, d) = 1`.
    pub fn normalize(self) -> Result<Self> {
        let generators = self
            .generators
            .iter()
            .map(HermitianOperator::z_normalized)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            generators,
            normalized: true,
            ..self
        })
    }

    /// Marks the set as spanning su(d), enabling direct SU(d) Haar sampling.
    pub fn with_universal(mut self, universal: bool) -> Self {
        self.universal = universal;
        self
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[HermitianOperator] {
        &self.generators
    }

    pub fn generator(&self, k: usize) -> &HermitianOperator {
        &self.generators[k]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_universal(&self) -> bool {
        self.universal
    }

    /// Computes and caches every generator's eigendecomposition.
    pub fn warm_spectra(&self) -> Result<()> {
        for h in &self.generators {
            h.try_spectrum()?;
        }
        Ok(())
    }

    fn from_terms(n: usize, groups: Vec<(&str, Vec<PauliString>)>) -> Result<Self> {
        let mut gens = Vec::with_capacity(groups.len());
        let mut labels = Vec::with_capacity(groups.len());
        for (label, terms) in groups {
            gens.push(pauli_sum(n, &terms)?);
            labels.push(label.to_string());
        }
        Self::new(gens, labels)?.normalize()
    }

    /// `{Σ X_i X_{i+1}, Σ Z_i}`
    pub fn tfi2(n: usize) -> Result<Self> {
        check_register(n, 2)?;
        Self::from_terms(
            n,
            vec![
                ("XX", bond_terms(n, Bonds::All, Pauli::X, 1.0)),
                ("Z", field_terms(n, Pauli::Z, 1.0)),
            ],
        )
    }

    /// `{Σ_even XX, Σ_odd XX, Σ Z}`
    pub fn tfi3(n: usize) -> Result<Self> {
        check_register(n, 2)?;
        check_even(n)?;
        Self::from_terms(
            n,
            vec![
                ("XX_even", bond_terms(n, Bonds::Even, Pauli::X, 1.0)),
                ("XX_odd", bond_terms(n, Bonds::Odd, Pauli::X, 1.0)),
                ("Z", field_terms(n, Pauli::Z, 1.0)),
            ],
        )
    }

    /// `{Σ_even (XX+YY), Σ_odd (XX+YY), Σ_even ZZ, Σ_odd ZZ}`
    pub fn xxz4(n: usize) -> Result<Self> {
        check_register(n, 2)?;
        check_even(n)?;
        let hop = |b: Bonds| {
            let mut t = bond_terms(n, b, Pauli::X, 1.0);
            t.extend(bond_terms(n, b, Pauli::Y, 1.0));
            t
        };
        Self::from_terms(
            n,
            vec![
                ("XXYY_even", hop(Bonds::Even)),
                ("XXYY_odd", hop(Bonds::Odd)),
                ("ZZ_even", bond_terms(n, Bonds::Even, Pauli::Z, 1.0)),
                ("ZZ_odd", bond_terms(n, Bonds::Odd, Pauli::Z, 1.0)),
            ],
        )
    }

    /// `{Σ_even XX, Σ_odd XX, Σ_even YY, Σ_odd YY, Σ_even ZZ, Σ_odd ZZ}`
    pub fn xxz6(n: usize) -> Result<Self> {
        check_register(n, 2)?;
        check_even(n)?;
        Self::from_terms(
            n,
            vec![
                ("XX_even", bond_terms(n, Bonds::Even, Pauli::X, 1.0)),
                ("XX_odd", bond_terms(n, Bonds::Odd, Pauli::X, 1.0)),
                ("YY_even", bond_terms(n, Bonds::Even, Pauli::Y, 1.0)),
                ("YY_odd", bond_terms(n, Bonds::Odd, Pauli::Y, 1.0)),
                ("ZZ_even", bond_terms(n, Bonds::Even, Pauli::Z, 1.0)),
                ("ZZ_odd", bond_terms(n, Bonds::Odd, Pauli::Z, 1.0)),
            ],
        )
    }

    /// Hamiltonian-variational set for the eight-qubit Kitaev model:
    /// `{Σ_{S_X} XX, Σ_{S_Y} YY, Σ_{S_Z} ZZ, Σ X, Σ Y, Σ Z}`.
    pub fn kitaev_hva() -> Result<Self> {
        let n = KITAEV_QUBITS;
        let pairs = |set: &[(usize, usize)], p: Pauli| -> Vec<PauliString> {
            set.iter()
                .map(|&(i, j)| PauliString::sparse(n, &[(i, p), (j, p)], 1.0))
                .collect()
        };
        Self::from_terms(
            n,
            vec![
                ("XX_SX", pairs(&KITAEV_X_BONDS, Pauli::X)),
                ("YY_SY", pairs(&KITAEV_Y_BONDS, Pauli::Y)),
                ("ZZ_SZ", pairs(&KITAEV_Z_BONDS, Pauli::Z)),
                ("X", field_terms(n, Pauli::X, 1.0)),
                ("Y", field_terms(n, Pauli::Y, 1.0)),
                ("Z", field_terms(n, Pauli::Z, 1.0)),
            ],
        )
    }

    /// Hardware-efficient set with `K = 4N`: for every qubit `i`, the
    /// generators `X_i`, `Y_i`, `U_CZ X_i U_CZ`, `U_CZ Y_i U_CZ`.
    pub fn hea_cz(n: usize) -> Result<Self> {
        check_register(n, 2)?;
        let signs = cz_layer_signs(n);
        let mut gens = Vec::with_capacity(4 * n);
        let mut labels = Vec::with_capacity(4 * n);
        for i in 0..n {
            let x = PauliString::sparse(n, &[(i, Pauli::X)], 1.0).matrix()?;
            let y = PauliString::sparse(n, &[(i, Pauli::Y)], 1.0).matrix()?;
            let cx = conjugate_by_signs(x.matrix(), &signs);
            let cy = conjugate_by_signs(y.matrix(), &signs);
            gens.push(x);
            gens.push(y);
            gens.push(HermitianOperator::new(cx)?);
            gens.push(HermitianOperator::new(cy)?);
            labels.extend([
                format!("X{i}"),
                format!("Y{i}"),
                format!("CZ.X{i}.CZ"),
                format!("CZ.Y{i}.CZ"),
            ]);
        }
        Self::new(gens, labels)?.normalize()
    }

    /// Every non-identity Pauli string on `n` qubits: a basis of su(2ⁿ).
    /// Flagged universal.
    pub fn full_su(n: usize) -> Result<Self> {
        check_register(n, 1)?;
        if n > 4 {
            return Err(Error::Guard(format!(
                "full su(d) basis limited to 4 qubits, got {n}"
            )));
        }
        let labels_1q = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        let mut gens = Vec::new();
        let mut labels = Vec::new();
        for code in 1..(1usize << (2 * n)) {
            let factors: Vec<Pauli> = (0..n)
                .map(|q| labels_1q[(code >> (2 * (n - 1 - q))) & 3])
                .collect();
            let ps = PauliString::new(factors, 1.0);
            labels.push(ps.factors.iter().map(|p| p.to_string()).collect());
            gens.push(ps.matrix()?);
        }
        Ok(Self::new(gens, labels)?.normalize()?.with_universal(true))
    }

    /// Builds a set from its serializable description.
    pub fn from_spec(spec: &GeneratorSpec) -> Result<Self> {
        let set = match *spec {
            GeneratorSpec::Tfi2 { n } => Self::tfi2(n)?,
            GeneratorSpec::Tfi3 { n } => Self::tfi3(n)?,
            GeneratorSpec::Xxz4 { n } => Self::xxz4(n)?,
            GeneratorSpec::Xxz6 { n } => Self::xxz6(n)?,
            GeneratorSpec::KitaevHva => Self::kitaev_hva()?,
            GeneratorSpec::HeaCz { n } => Self::hea_cz(n)?,
            GeneratorSpec::FullSu { n } => Self::full_su(n)?,
        };
        Ok(set)
    }
}

/// Serializable name and parameters of a generator set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "set", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Tfi2 { n: usize },
    Tfi3 { n: usize },
    Xxz4 { n: usize },
    Xxz6 { n: usize },
    KitaevHva,
    HeaCz { n: usize },
    FullSu { n: usize },
}

impl GeneratorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorSpec::Tfi2 { .. } => "TFI2",
            GeneratorSpec::Tfi3 { .. } => "TFI3",
            GeneratorSpec::Xxz4 { .. } => "XXZ4",
            GeneratorSpec::Xxz6 { .. } => "XXZ6",
            GeneratorSpec::KitaevHva => "KitaevHVA",
            GeneratorSpec::HeaCz { .. } => "HEA-CZ",
            GeneratorSpec::FullSu { .. } => "SU(d)",
        }
    }
}

/// Diagonal of `U_CZ = Π_even CZ · Π_odd CZ` over periodic bonds: entry
/// `(−1)^{#bonds with both bits set}`.
pub fn cz_layer_signs(n: usize) -> Vec<f64> {
    let bonds: Vec<(usize, usize)> = Bonds::Even
        .sites(n)
        .into_iter()
        .chain(Bonds::Odd.sites(n))
        .collect();
    (0..1usize << n)
        .map(|idx| {
            let bit = |q: usize| (idx >> (n - 1 - q)) & 1;
            let hits: usize = bonds.iter().map(|&(i, j)| bit(i) & bit(j)).sum();
            if hits.is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

fn conjugate_by_signs(a: &ComplexMatrix, s: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.rows(), a.cols(), |r, c| a[(r, c)] * (s[r] * s[c]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_normalized(set: &GeneratorSet) {
        let d = set.dim() as f64;
        for h in set.generators() {
            assert!((h.trace_of_square() - (d * d - 1.0)).abs() <= 1e-6 * d * d);
            assert!(h.trace().abs() <= 1e-8);
        }
        assert!(set.is_normalized());
    }

    #[test]
    fn sizes_and_normalization() {
        let cases = [
            (GeneratorSet::tfi2(4).unwrap(), 2),
            (GeneratorSet::tfi3(4).unwrap(), 3),
            (GeneratorSet::xxz4(4).unwrap(), 4),
            (GeneratorSet::xxz6(6).unwrap(), 6),
            (GeneratorSet::hea_cz(4).unwrap(), 16),
            (GeneratorSet::full_su(2).unwrap(), 15),
        ];
        for (set, k) in cases {
            assert_eq!(set.len(), k);
            assert_normalized(&set);
        }
    }

    #[test]
    fn tfi2_trace_of_square() {
        let set = GeneratorSet::tfi2(4).unwrap();
        for h in set.generators() {
            assert!((h.trace_of_square() - 255.0).abs() < 1e-9);
        }
    }

    #[test]
    fn kitaev_set_is_normalized() {
        let set = GeneratorSet::kitaev_hva().unwrap();
        assert_eq!(set.len(), 6);
        assert_eq!(set.dim(), 256);
        assert_normalized(&set);
    }

    #[test]
    fn odd_split_rejected() {
        assert!(GeneratorSet::tfi3(5).is_err());
        assert!(GeneratorSet::xxz4(3).is_err());
        assert!(GeneratorSet::xxz6(7).is_err());
        assert!(GeneratorSet::tfi2(5).is_ok());
    }

    #[test]
    fn cz_signs_match_explicit_gates() {
        // n = 3: bonds (0,1), (2,0), (1,2)
        let s = cz_layer_signs(3);
        assert_eq!(s.len(), 8);
        for (idx, &sign) in s.iter().enumerate() {
            let b = [(idx >> 2) & 1, (idx >> 1) & 1, idx & 1];
            let hits = b[0] * b[1] + b[1] * b[2] + b[2] * b[0];
            assert_eq!(sign, if hits % 2 == 0 { 1.0 } else { -1.0 });
        }
    }

    #[test]
    fn rejects_mismatched_or_traced_generators() {
        let a = HermitianOperator::diagonal(&[1.0, -1.0]);
        let b = HermitianOperator::diagonal(&[1.0, -1.0, 0.0, 0.0]);
        assert!(GeneratorSet::new(vec![a, b], vec!["a".into(), "b".into()]).is_err());
        let c = HermitianOperator::identity(2);
        assert!(GeneratorSet::new(vec![c], vec!["c".into()]).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let spec = GeneratorSpec::Xxz4 { n: 4 };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"set":"xxz4","n":4}"#);
        let back: GeneratorSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        assert_eq!(GeneratorSet::from_spec(&back).unwrap().len(), 4);
    }
}
