//! Ansatz-induced invariant subspace: projector estimate, effective
//! dimension, effective spectrum and compatibility.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::subgroup_walk_state;
use crate::dynamics::spectral_ratio;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::hamiltonians::{dump_matrix, GeneratorSet};
use crate::linalg::{eig_hermitian_raw, ComplexMatrix, HermitianOperator, StateVector, C64};
use crate::seed::derived_rng;

/// Default number of orbit samples.
pub const DEFAULT_R: usize = 100;
/// Default relative rank cutoff (times the largest eigenvalue of `Π̂`).
pub const DEFAULT_RANK_TOL: f64 = 1e-6;
/// Default bound on `‖(I − QQ†)|Ψ*⟩‖` for compatibility.
pub const DEFAULT_LEAK_TOL: f64 = 1e-6;

/// `(1/R) Σ_r U_r|Φ⟩⟨Φ|U_r†` with sample `r` drawn from its own stream
/// `derive_seed(seed, [r])`. The sum is reduced in index order, so the result
/// does not depend on the execution strategy.
pub fn estimate_projector_seeded(
    gens: &GeneratorSet,
    phi: &StateVector,
    r_samples: usize,
    l_sample: usize,
    seed: u64,
    exec: Execution,
) -> Result<HermitianOperator> {
    if r_samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    if phi.dim() != gens.dim() {
        return Err(Error::Dimension(
            "input state and generators differ in dimension".into(),
        ));
    }
    gens.warm_spectra()?;
    let states = map_indexed(exec, r_samples, |r| {
        let mut rng = derived_rng(seed, &[r as u64]);
        let mut v = phi.amplitudes().to_vec();
        subgroup_walk_state(gens, l_sample, &mut rng, &mut v);
        v
    });
    let d = gens.dim();
    let w = 1.0 / r_samples as f64;
    let mut acc = ComplexMatrix::zeros(d, d);
    for v in &states {
        for i in 0..d {
            let vi = v[i] * w;
            let row = acc.row_mut(i);
            for (j, vj) in v.iter().enumerate() {
                row[j] += vi * vj.conj();
            }
        }
    }
    HermitianOperator::new(acc)
}

/// [`estimate_projector_seeded`] with its stream seed drawn from `rng`.
pub fn estimate_projector<R: Rng + ?Sized>(
    gens: &GeneratorSet,
    phi: &StateVector,
    r_samples: usize,
    l_sample: usize,
    rng: &mut R,
) -> Result<HermitianOperator> {
    let seed = rng.random();
    estimate_projector_seeded(gens, phi, r_samples, l_sample, seed, Execution::default())
}

/// Eigenvectors of `Π̂` with eigenvalue above `rank_tol · λ_max`, as the
/// columns of `Q`. Returns `(Q, d_eff, eigenvalues in descending order)`.
pub fn extract_basis(
    pi_hat: &HermitianOperator,
    rank_tol: f64,
) -> Result<(ComplexMatrix, usize, Vec<f64>)> {
    let spec = pi_hat.try_spectrum()?;
    let d = pi_hat.dim();
    let lmax = spec.values.last().copied().unwrap_or(0.0);
    if !(lmax > 0.0) {
        return Err(Error::Degenerate(
            "projector estimate has no positive eigenvalue".into(),
        ));
    }
    let cut = rank_tol * lmax;
    let keep: Vec<usize> = (0..d).rev().filter(|&i| spec.values[i] > cut).collect();
    let q = ComplexMatrix::from_fn(d, keep.len(), |r, c| spec.vectors[(r, keep[c])]);
    let decay = spec.values.iter().rev().copied().collect();
    Ok((q, keep.len(), decay))
}

/// Eigenvalues of `Q†MQ` and the derived spectral ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSpectrum {
    pub lambda_prime: Vec<f64>,
    /// `(λ′_{d_eff} − λ′_1)/(λ′_2 − λ′_1)`, `+∞` when degenerate.
    #[serde(with = "float_or_inf")]
    pub kappa_eff: f64,
    pub degenerate: bool,
}

pub fn effective_spectrum(m: &HermitianOperator, q: &ComplexMatrix) -> Result<EffectiveSpectrum> {
    if q.cols() == 0 {
        return Err(Error::Degenerate("empty basis".into()));
    }
    let lambda_prime = eig_hermitian_raw(m.compress(q)?.matrix())?.values;
    let kappa_eff = spectral_ratio(&lambda_prime);
    Ok(EffectiveSpectrum {
        degenerate: kappa_eff.is_infinite(),
        lambda_prime,
        kappa_eff,
    })
}

/// Effective generator `Q†HQ`.
pub fn h_eff(h: &HermitianOperator, q: &ComplexMatrix) -> Result<HermitianOperator> {
    h.compress(q)
}

/// `‖(I − QQ†) v‖`
pub fn leakage(q: &ComplexMatrix, v: &[C64]) -> f64 {
    let coeffs = {
        let mut c = vec![C64::new(0.0, 0.0); q.cols()];
        q.adjoint_matvec_into(v, &mut c);
        c
    };
    let proj = q.matvec(&coeffs);
    v.iter()
        .zip(&proj)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compatibility {
    pub compatible: bool,
    /// Leakage of the ground state. For a degenerate ground space this is
    /// the smallest leakage over unit vectors in that space.
    pub ground_leakage: f64,
    pub degenerate_ground: bool,
}

/// Checks that the ground state of `m` lies in the span of `q`.
pub fn compatibility_check(
    m: &HermitianOperator,
    q: &ComplexMatrix,
    leak_tol: f64,
) -> Result<Compatibility> {
    let spec = m.try_spectrum()?;
    let scale = spec.values.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let tol = crate::dynamics::DEGENERACY_TOL * scale;
    let g = spec
        .values
        .iter()
        .take_while(|&&v| v - spec.values[0] <= tol)
        .count();
    let ground_leakage = if g == 1 {
        leakage(q, &spec.eigenvector(0))
    } else {
        // Smallest singular value of (I − QQ†)G over the ground basis G.
        let d = m.dim();
        let mut cols = Vec::with_capacity(g);
        for i in 0..g {
            let v = spec.eigenvector(i);
            let mut c = vec![C64::new(0.0, 0.0); q.cols()];
            q.adjoint_matvec_into(&v, &mut c);
            let pv = q.matvec(&c);
            cols.push(v.iter().zip(&pv).map(|(a, b)| a - b).collect::<Vec<_>>());
        }
        let r = ComplexMatrix::from_fn(d, g, |row, c| cols[c][row]);
        r.singular_values().last().copied().unwrap_or(0.0)
    };
    Ok(Compatibility {
        compatible: ground_leakage <= leak_tol,
        ground_leakage,
        degenerate_ground: g > 1,
    })
}

/// `‖(I − QQ†) U Q‖_op`: how far `U` moves the subspace out of itself.
pub fn invariance_residual(q: &ComplexMatrix, u: &ComplexMatrix) -> f64 {
    let uq = u.matmul(q);
    let back = q.matmul(&q.adjoint().matmul(&uq));
    (&uq - &back).op_norm()
}

/// Options for [`effective_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    pub r_samples: usize,
    pub l_sample: usize,
    pub seed: u64,
    pub rank_tol: f64,
    pub leak_tol: f64,
    /// Re-estimate with `2R` samples and compare `d_eff`.
    pub robustness: bool,
    #[serde(default)]
    pub execution: Execution,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            r_samples: DEFAULT_R,
            l_sample: crate::ansatz::DEFAULT_L_SAMPLE,
            seed: 0,
            rank_tol: DEFAULT_RANK_TOL,
            leak_tol: DEFAULT_LEAK_TOL,
            robustness: false,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustnessCheck {
    pub r_samples: usize,
    pub d_eff: usize,
    pub consistent: bool,
}

/// Full effective-subspace analysis of `(M, A, |Φ⟩)`.
#[derive(Debug, Clone)]
pub struct EffectiveProfile {
    pub pi_hat: HermitianOperator,
    /// Eigenvalues of `Π̂`, descending.
    pub eigen_decay: Vec<f64>,
    pub basis_q: ComplexMatrix,
    pub d_eff: usize,
    pub effective_spectrum: EffectiveSpectrum,
    pub kappa: f64,
    pub compatibility: Compatibility,
    pub input_leakage: f64,
    pub robustness: Option<RobustnessCheck>,
    pub options: ProfileOptions,
}

impl EffectiveProfile {
    pub fn kappa_eff(&self) -> f64 {
        self.effective_spectrum.kappa_eff
    }

    pub fn summary(&self) -> ProfileSummary {
        ProfileSummary {
            d: self.pi_hat.dim(),
            d_eff: self.d_eff,
            kappa: self.kappa,
            kappa_eff: self.effective_spectrum.kappa_eff,
            degenerate: self.effective_spectrum.degenerate,
            lambda_prime: self.effective_spectrum.lambda_prime.clone(),
            eigen_decay: self.eigen_decay.clone(),
            compatible: self.compatibility.compatible,
            ground_leakage: self.compatibility.ground_leakage,
            input_leakage: self.input_leakage,
            robustness: self.robustness,
            r_samples: self.options.r_samples,
            l_sample: self.options.l_sample,
            seed: self.options.seed,
            rank_tol: self.options.rank_tol,
        }
    }

    /// Writes `profile.json` and, optionally, `basis_q.bin` (row-major
    /// `d × d_eff` little-endian complex doubles) into `dir`.
    pub fn save(&self, dir: &Path, dump_basis: bool) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let f = std::fs::File::create(dir.join("profile.json"))?;
        serde_json::to_writer_pretty(f, &self.summary())?;
        if dump_basis {
            dump_matrix(&self.basis_q, &dir.join("basis_q.bin"))?;
        }
        Ok(())
    }
}

/// JSON-facing view of an [`EffectiveProfile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub d: usize,
    pub d_eff: usize,
    #[serde(with = "float_or_inf")]
    pub kappa: f64,
    #[serde(with = "float_or_inf")]
    pub kappa_eff: f64,
    pub degenerate: bool,
    pub lambda_prime: Vec<f64>,
    pub eigen_decay: Vec<f64>,
    pub compatible: bool,
    pub ground_leakage: f64,
    pub input_leakage: f64,
    pub robustness: Option<RobustnessCheck>,
    pub r_samples: usize,
    pub l_sample: usize,
    pub seed: u64,
    pub rank_tol: f64,
}

pub fn effective_profile(
    m: &HermitianOperator,
    gens: &GeneratorSet,
    phi: &StateVector,
    opts: &ProfileOptions,
) -> Result<EffectiveProfile> {
    if m.dim() != gens.dim() {
        return Err(Error::Dimension(
            "objective and generators differ in dimension".into(),
        ));
    }
    let pi_hat = estimate_projector_seeded(
        gens,
        phi,
        opts.r_samples,
        opts.l_sample,
        opts.seed,
        opts.execution,
    )?;
    let (basis_q, d_eff, eigen_decay) = extract_basis(&pi_hat, opts.rank_tol)?;
    let effective_spectrum = effective_spectrum(m, &basis_q)?;
    let compatibility = compatibility_check(m, &basis_q, opts.leak_tol)?;
    let input_leakage = leakage(&basis_q, phi.amplitudes());
    let robustness = if opts.robustness {
        let r2 = 2 * opts.r_samples;
        let pi2 = estimate_projector_seeded(
            gens,
            phi,
            r2,
            opts.l_sample,
            crate::seed::derive_seed(opts.seed, &[u64::MAX]),
            opts.execution,
        )?;
        let (_, d2, _) = extract_basis(&pi2, opts.rank_tol)?;
        if d2 != d_eff {
            log::warn!("d_eff changed from {d_eff} to {d2} when doubling R to {r2}");
        }
        Some(RobustnessCheck {
            r_samples: r2,
            d_eff: d2,
            consistent: d2 == d_eff,
        })
    } else {
        None
    };
    Ok(EffectiveProfile {
        kappa: spectral_ratio(m.try_spectrum()?.values.as_slice()),
        pi_hat,
        eigen_decay,
        basis_q,
        d_eff,
        effective_spectrum,
        compatibility,
        input_leakage,
        robustness,
        options: *opts,
    })
}

/// One grid point of a spectral-ratio scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaRow {
    pub param: f64,
    #[serde(with = "float_or_inf")]
    pub kappa: f64,
    #[serde(with = "float_or_inf")]
    pub kappa_eff: f64,
    pub d_eff: usize,
    pub degenerate_flag: bool,
}

/// Full and effective spectral ratios across a parameter grid, reusing one
/// subspace basis `q` for every point.
pub fn kappa_scan(
    grid: &[f64],
    build: impl Fn(f64) -> Result<HermitianOperator>,
    q: &ComplexMatrix,
) -> Result<Vec<KappaRow>> {
    grid.iter()
        .map(|&param| {
            let m = build(param)?;
            let kappa = spectral_ratio(&m.try_spectrum()?.values);
            let eff = effective_spectrum(&m, q)?;
            Ok(KappaRow {
                param,
                kappa,
                kappa_eff: eff.kappa_eff,
                d_eff: q.cols(),
                degenerate_flag: eff.degenerate || kappa.is_infinite(),
            })
        })
        .collect()
}

pub fn write_kappa_csv<W: std::io::Write>(rows: &[KappaRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["param", "kappa", "kappa_eff", "d_eff", "degenerate_flag"])?;
    for r in rows {
        wr.write_record([
            r.param.to_string(),
            fmt_float(r.kappa),
            fmt_float(r.kappa_eff),
            r.d_eff.to_string(),
            r.degenerate_flag.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

fn fmt_float(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        x.to_string()
    }
}

/// Serializes infinite values as the string `"inf"` (JSON has no infinity).
pub(crate) mod float_or_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() {
            s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*x)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("bad float {other:?}"))),
            },
        }
    }
}
