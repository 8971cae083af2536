//! Sequential vs rayon-parallel execution of the two hot loops: projector
//! estimation (independent subgroup walks) and success-rate sweeps
//! (independent training trials). Both strategies produce identical output,
//! so only wall time differs.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vqe_core::effective::estimate_projector_seeded;
use vqe_core::experiments::{success_rate, ProblemSpec, SweepConfig, SweepContext};
use vqe_core::hamiltonians::{GeneratorSet, InputState};
use vqe_core::Execution;

const STRATEGIES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn label(exec: Execution) -> &'static str {
    match exec {
        Execution::Sequential => "sequential",
        Execution::Parallel => "parallel",
    }
}

fn bench_projector(c: &mut Criterion) {
    let mut group = c.benchmark_group("projector_estimate");
    group
        .sample_size(10)
        .measurement_time(Duration::from_secs(10));
    for n in [6usize, 8] {
        let gens = GeneratorSet::tfi3(n).unwrap();
        gens.warm_spectra().unwrap();
        let phi = InputState::Zero.build(n).unwrap();
        for exec in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(label(exec), n), &n, |b, _| {
                b.iter(|| {
                    black_box(estimate_projector_seeded(&gens, &phi, 100, 20, 7, exec).unwrap())
                })
            });
        }
    }
    group.finish();
}

fn bench_success_rate(c: &mut Criterion) {
    let mut group = c.benchmark_group("success_rate");
    group
        .sample_size(10)
        .measurement_time(Duration::from_secs(20));
    for d in [8usize, 16] {
        let mut cfg = SweepConfig::new(
            ProblemSpec::Synthetic {
                d,
                d_eff: 4,
                kappa_eff: 2.0,
            },
            vec![8],
        );
        cfg.trials_per_p = 16;
        cfg.max_steps = 2000;
        for exec in STRATEGIES {
            cfg.execution = exec;
            let ctx = SweepContext::new(&cfg).unwrap();
            group.bench_with_input(BenchmarkId::new(label(exec), d), &d, |b, _| {
                b.iter(|| black_box(success_rate(&ctx, 8)))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_projector, bench_success_rate);
criterion_main!(benches);
