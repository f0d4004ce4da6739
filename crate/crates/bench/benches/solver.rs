use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use maxmean_bench::{instance, start};
use maxmean_core::crossover::{greedy_crossover, uniform_crossover};
use maxmean_core::{evaluate_full, tabu_search, Budget, TabuParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn full_evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate_full");
    for n in [100, 500, 1000] {
        let inst = instance(n);
        let sol = start(&inst, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| evaluate_full(&inst, black_box(sol.bits())))
        });
    }
    group.finish();
}

fn neighbourhood_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan_and_flip");
    for n in [100, 500, 1000] {
        let inst = instance(n);
        let mut sol = start(&inst, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                let best = (0..inst.n())
                    .filter(|&i| sol.can_flip(i))
                    .max_by(|&a, &b| sol.delta_unchecked(a).total_cmp(&sol.delta_unchecked(b)))
                    .unwrap();
                sol.flip(&inst, best).unwrap();
                // undo so the state stays comparable between iterations
                if sol.can_flip(best) {
                    sol.flip(&inst, best).unwrap();
                }
            })
        });
    }
    group.finish();
}

fn tabu_iterations(c: &mut Criterion) {
    let mut group = c.benchmark_group("tabu_10k_iterations");
    group.sample_size(10);
    for n in [100, 500] {
        let inst = instance(n);
        let s0 = start(&inst, 3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                let mut rng = ChaCha8Rng::seed_from_u64(3);
                let params = TabuParams {
                    alpha: u64::MAX,
                    t_max: 120,
                };
                tabu_search(
                    &inst,
                    s0.clone(),
                    &params,
                    &mut rng,
                    &mut Budget::iterations(10_000),
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn crossovers(c: &mut Criterion) {
    let inst = instance(500);
    let (a, b) = (start(&inst, 4), start(&inst, 5));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    c.bench_function("uniform_crossover_500", |bench| {
        bench.iter(|| uniform_crossover(&a, &b, &mut rng))
    });
    c.bench_function("greedy_crossover_500", |bench| {
        bench.iter(|| greedy_crossover(&inst, &a, &b))
    });
}

criterion_group!(
    benches,
    full_evaluation,
    neighbourhood_scan,
    tabu_iterations,
    crossovers
);
criterion_main!(benches);
