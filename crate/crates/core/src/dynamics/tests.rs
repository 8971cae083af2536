use rand::Rng;

use super::*;
use crate::ansatz::PartiallyTrainableAnsatz;
use crate::ansatz::{build_partially_trainable, Ansatz, AnyAnsatz, FullyTrainableAnsatz};
use crate::hamiltonians::GeneratorSet;
use crate::linalg::{gaussian_matrix, haar_state, haar_unitary, HermitianOperator, StateVector};
use crate::seed::rng_from_seed;

fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> HermitianOperator {
    let g = gaussian_matrix(d, d, rng);
    HermitianOperator::new(&g + &g.adjoint()).unwrap()
}

fn random_instance(seed: u64, p: usize) -> (VqeInstance, Vec<f64>) {
    let mut rng = rng_from_seed(seed);
    let gens = GeneratorSet::full_su(2).unwrap();
    let a = build_partially_trainable(&gens, (seed % 15) as usize, p, 0, &mut rng).unwrap();
    let m = random_hermitian(4, &mut rng);
    let phi = haar_state(4, &mut rng);
    let theta = (0..p).map(|_| rng.random_range(-3.0..3.0)).collect();
    (VqeInstance::new(m, phi, AnyAnsatz::from(a)).unwrap(), theta)
}

fn finite_difference(inst: &VqeInstance, theta: &[f64], h: f64) -> Vec<f64> {
    (0..theta.len())
        .map(|j| {
            let mut tp = theta.to_vec();
            let mut tm = theta.to_vec();
            tp[j] += h;
            tm[j] -= h;
            (inst.loss(&tp).unwrap() - inst.loss(&tm).unwrap()) / (2.0 * h)
        })
        .collect()
}

#[test]
fn gradient_matches_finite_differences() {
    for seed in 0..50 {
        let (inst, theta) = random_instance(seed, 6);
        let g = inst.analytic_gradient(&theta).unwrap();
        let fd = finite_difference(&inst, &theta, 1e-5);
        let scale = g.iter().map(|x| x.abs()).fold(1e-3, f64::max);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-5 * scale, "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn adjoint_sweep_matches_commutator_trace() {
    for seed in 0..10 {
        let (inst, theta) = random_instance(100 + seed, 5);
        let a = inst.analytic_gradient(&theta).unwrap();
        let b = inst.commutator_gradient(&theta).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn fully_trainable_gradient_matches_finite_differences() {
    let gens = GeneratorSet::tfi3(4).unwrap();
    let a = FullyTrainableAnsatz::new(&gens, 3).unwrap();
    let mut rng = rng_from_seed(3);
    let m = crate::hamiltonians::tfi1d(4, 0.7).unwrap();
    let phi = StateVector::uniform(16);
    let inst = VqeInstance::new(m, phi, AnyAnsatz::from(a)).unwrap();
    let theta: Vec<f64> = (0..9)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    let g = inst.analytic_gradient(&theta).unwrap();
    let fd = finite_difference(&inst, &theta, 1e-5);
    for (x, y) in g.iter().zip(&fd) {
        assert!((x - y).abs() < 1e-6 * x.abs().max(1.0));
    }
}

#[test]
fn identity_objective_has_flat_landscape() {
    let (inst, theta) = random_instance(4, 4);
    let flat = VqeInstance::new(
        HermitianOperator::identity(4),
        inst.input_state().clone(),
        inst.ansatz().clone(),
    )
    .unwrap();
    assert!((flat.loss(&theta).unwrap() - 1.0).abs() < 1e-12);
    assert!(flat
        .analytic_gradient(&theta)
        .unwrap()
        .iter()
        .all(|g| g.abs() < 1e-12));
}

#[test]
fn eigenstate_output_is_stationary() {
    let gens = GeneratorSet::tfi2(3).unwrap();
    let a = FullyTrainableAnsatz::new(&gens, 2).unwrap();
    let m = crate::hamiltonians::tfi1d(3, 0.4).unwrap();
    let ground = m.spectrum().eigenvector(0);
    let inst = VqeInstance::new(
        m.clone(),
        StateVector::new(ground).unwrap(),
        AnyAnsatz::from(a),
    )
    .unwrap();
    let theta = [0.0; 4];
    assert!((inst.loss(&theta).unwrap() - m.eigenvalues()[0]).abs() < 1e-12);
    assert!(inst
        .analytic_gradient(&theta)
        .unwrap()
        .iter()
        .all(|g| g.abs() < 1e-10));
    assert!(inst.overlap_error(&inst.output(&theta).unwrap()) < 1e-12);
}

#[test]
fn small_steps_do_not_increase_loss() {
    for seed in 0..20 {
        let (inst, theta) = random_instance(200 + seed, 4);
        let mut opts = TrainingOptions::new(1e-3);
        opts.max_steps = 50;
        opts.stop_on_convergence = false;
        let trace = gradient_descent(&inst, &theta, &opts, &mut rng_from_seed(0)).unwrap();
        for w in trace.records.windows(2) {
            assert!(w[1].loss <= w[0].loss + 1e-9);
        }
        let (lo, hi) = (inst.spectrum()[0], inst.spectrum()[3]);
        for r in &trace.records {
            assert!(r.loss >= lo - 1e-9 && r.loss <= hi + 1e-9);
            assert!((0.0..=1.0 + 1e-9).contains(&r.overlap_error));
        }
    }
}

#[test]
fn overparameterized_synthetic_training_converges() {
    let mut rng = rng_from_seed(12);
    let inst = crate::hamiltonians::make_synthetic(8, 4, 2.0, 40, &mut rng).unwrap();
    let a = PartiallyTrainableAnsatz::from_parts(inst.h.clone(), inst.frozen_unitaries.clone())
        .unwrap();
    let vqe = VqeInstance::new(inst.m.clone(), inst.input_state.clone(), a).unwrap();
    let opts = TrainingOptions::new(1e-2 / 40.0 * 40.0);
    let trace = gradient_descent(&vqe, &[0.0; 40], &opts, &mut rng).unwrap();
    assert!(trace.converged(), "{:?}", trace.termination);
    assert!(trace.final_overlap_error < DEFAULT_CONVERGENCE);
}

#[test]
fn noise_is_seeded_and_perturbs_the_path() {
    let (inst, theta) = random_instance(7, 3);
    let mut opts = TrainingOptions::new(1e-2);
    opts.max_steps = 20;
    opts.stop_on_convergence = false;
    let clean = gradient_descent(&inst, &theta, &opts, &mut rng_from_seed(1)).unwrap();
    opts.noise = NoiseSpec::gaussian(1e-2);
    let a = gradient_descent(&inst, &theta, &opts, &mut rng_from_seed(1)).unwrap();
    let b = gradient_descent(&inst, &theta, &opts, &mut rng_from_seed(1)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.final_theta, clean.final_theta);
    opts.noise = NoiseSpec::gaussian(-1.0);
    assert!(gradient_descent(&inst, &theta, &opts, &mut rng_from_seed(1)).is_err());
}

#[test]
fn recording_policy_and_csv() {
    let (inst, theta) = random_instance(9, 3);
    let mut opts = TrainingOptions::new(1e-2);
    opts.max_steps = 20;
    opts.stop_on_convergence = false;
    opts.record = RecordingPolicy::every(5).with_y(10);
    let trace = gradient_descent(&inst, &theta, &opts, &mut rng_from_seed(1)).unwrap();
    let steps: Vec<usize> = trace.records.iter().map(|r| r.step).collect();
    assert_eq!(steps, vec![0, 1, 2, 4, 5, 8, 10, 15, 16, 20]);
    let y_steps: Vec<usize> = trace
        .records
        .iter()
        .filter(|r| r.dy_op.is_some())
        .map(|r| r.step)
        .collect();
    assert_eq!(y_steps, vec![0, 1, 2, 4, 8, 10, 16, 20]);
    assert_eq!(trace.records[0].dy_op, Some(0.0));
    assert_eq!(
        trace.termination,
        Termination::BudgetExhausted { steps: 20 }
    );
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("step,loss,overlap_error,dtheta_inf,dtheta_2,dy_op\n"));
    assert_eq!(text.lines().count(), 11);
    let (dy, dth) = deviation_metrics(&trace);
    assert!(dy >= 0.0 && dth > 0.0);
}

#[test]
fn degenerate_ground_space_uses_projector() {
    let m = HermitianOperator::diagonal(&[0.0, 0.0, 1.0, 2.0]);
    let gens = GeneratorSet::full_su(2).unwrap();
    let a = FullyTrainableAnsatz::new(&gens, 1).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phi = StateVector::new(vec![
        crate::linalg::C64::new(s, 0.0),
        crate::linalg::C64::new(0.0, s),
        crate::linalg::ZERO,
        crate::linalg::ZERO,
    ])
    .unwrap();
    let inst = VqeInstance::new(m, phi.clone(), AnyAnsatz::from(a)).unwrap();
    assert!(inst.is_degenerate());
    assert!(inst.overlap_error(phi.amplitudes()) < 1e-14);
    assert!(inst.kappa().is_infinite());
}

#[test]
fn y_mean_over_haar_frozen_draws_approaches_y_star() {
    // Four trainable layers between Haar frozen unitaries, θ held fixed.
    let h = GeneratorSet::tfi2(2).unwrap().generator(0).clone();
    let (d, p) = (4, 4);
    let samples = 10_000;
    let mut rng = rng_from_seed(21);
    for theta in [[0.0; 4], [0.83, -0.2, 1.7, 0.05]] {
        let mut acc = crate::linalg::ComplexMatrix::zeros(d * d, d * d);
        for _ in 0..samples {
            let frozen = (0..=p).map(|_| haar_unitary(d, &mut rng)).collect();
            let a = PartiallyTrainableAnsatz::from_parts(h.clone(), frozen).unwrap();
            let y = compute_y(&a, &theta).unwrap();
            acc.add_scaled(
                y.matrix(),
                crate::linalg::C64::new(1.0 / samples as f64, 0.0),
            );
        }
        let mean = HermitianOperator::new(acc).unwrap();
        let dist = op_norm_distance(&mean, &y_star(d)).unwrap();
        assert!(
            dist < 5.0 / (samples as f64).sqrt(),
            "θ = {theta:?}: {dist}"
        );
    }
}

#[test]
fn y_norm_bound_and_traceless() {
    let (inst, theta) = random_instance(31, 5);
    let y = compute_y(inst.ansatz(), &theta).unwrap();
    assert!(y.trace().abs() < 1e-8);
    let h = inst.ansatz().generator_of_param(0);
    assert!(y.op_norm() <= h.op_norm().powi(2) / h.z_factor() + 1e-10);
}
