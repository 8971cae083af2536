use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{inner, norm2, ComplexMatrix, C64, ONE};
use super::state::StateVector;

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows × cols` matrix of i.i.d. standard complex Gaussians (Ginibre).
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed element of U(d).
///
/// Gram–Schmidt on the columns of a Ginibre matrix yields the QR factor whose
/// triangular part has a positive real diagonal, which is the phase convention
/// under which Q is exactly Haar.
pub fn haar_unitary_u<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    assert!(d >= 1, "Haar unitary needs d >= 1");
    let g = gaussian_matrix(d, d, rng);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for c in 0..d {
        let mut v = g.column(c);
        // two passes of modified Gram–Schmidt keep the columns orthogonal to
        // machine precision
        for _ in 0..2 {
            for q in &cols {
                let proj = inner(q, &v);
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= proj * y;
                }
            }
        }
        let n = norm2(&v);
        v.iter_mut().for_each(|x| *x /= n);
        cols.push(v);
    }
    ComplexMatrix::from_columns(&cols).expect("square by construction")
}

/// Haar-distributed element of SU(d): a U(d) sample with the determinant
/// phase divided out.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    if d == 1 {
        return ComplexMatrix::from_vec(1, 1, vec![ONE]).unwrap();
    }
    let u = haar_unitary_u(d, rng);
    let det = u.determinant();
    let phase = C64::from_polar(1.0, -det.arg() / d as f64);
    u.scale(phase)
}

/// Haar-random pure state in `C^d`.
pub fn haar_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> StateVector {
    let v: Vec<C64> = (0..d).map(|_| complex_gaussian(rng)).collect();
    StateVector::new(v).expect("Gaussian vector is nonzero with probability one")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn su1_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = haar_unitary(1, &mut rng);
        assert_eq!(u[(0, 0)], ONE);
    }

    #[test]
    fn samples_are_special_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in [2, 3, 4, 8, 16] {
            let u = haar_unitary(d, &mut rng);
            assert!(u.unitarity_error() < 1e-10, "d={d}");
            let det = u.determinant();
            assert!((det.norm() - 1.0).abs() < 1e-10);
            assert!((det - ONE).norm() < 1e-9, "det = {det}");
        }
    }

    #[test]
    fn second_moment_entries_match_haar() {
        // E[U_ij conj(U_kl)] = δ_ik δ_jl / d
        let d = 2;
        let samples = 20_000;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut acc = ComplexMatrix::zeros(d * d, d * d);
        for _ in 0..samples {
            let u = haar_unitary(d, &mut rng);
            let uc = ComplexMatrix::from_fn(d, d, |r, c| u[(r, c)].conj());
            acc.add_scaled(&u.kron(&uc), C64::new(1.0 / samples as f64, 0.0));
        }
        let tol = 3.0 / (samples as f64).sqrt();
        for i in 0..d {
            for k in 0..d {
                for j in 0..d {
                    for l in 0..d {
                        let expected = if i == k && j == l {
                            1.0 / d as f64
                        } else {
                            0.0
                        };
                        let got = acc[(i * d + k, j * d + l)];
                        assert!(
                            (got - C64::new(expected, 0.0)).norm() < tol,
                            "entry ({i}{k},{j}{l}) = {got}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn first_moment_twirl_is_maximally_mixed() {
        let samples = 10_000;
        for d in [2usize, 4] {
            let mut rng = ChaCha8Rng::seed_from_u64(10 + d as u64);
            let a = gaussian_matrix(d, d, &mut rng);
            let mut acc = ComplexMatrix::zeros(d, d);
            for _ in 0..samples {
                let u = haar_unitary(d, &mut rng);
                acc.add_scaled(
                    &u.matmul(&a).matmul_adjoint(&u),
                    C64::new(1.0 / samples as f64, 0.0),
                );
            }
            let target = ComplexMatrix::identity(d).scale(a.trace() / d as f64);
            let dev = (&acc - &target).op_norm();
            assert!(
                dev <= 5.0 * a.op_norm() / (samples as f64).sqrt(),
                "d={d} dev={dev}"
            );
        }
    }

    #[test]
    fn same_seed_same_sample() {
        let a = haar_unitary(4, &mut ChaCha8Rng::seed_from_u64(9));
        let b = haar_unitary(4, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }
}
