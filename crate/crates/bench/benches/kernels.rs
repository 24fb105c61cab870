use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use epi_lab_bench::{batch, counterexample_density, gaussian};
use epi_lab_core::counterexample::{compute_j, k_functional, PerturbationG};
use epi_lab_core::density::{convolve, normalized_iid_sum};
use epi_lab_core::hadamard::{knn_entropy, polar_entropy};
use std::hint::black_box;

fn densities(c: &mut Criterion) {
    let d = gaussian();
    c.bench_function("convolve_2^14", |b| b.iter(|| convolve(black_box(&d), black_box(&d)).unwrap()));
    c.bench_function("normalized_iid_sum_64", |b| b.iter(|| normalized_iid_sum(black_box(&d), 64).unwrap()));
    let f = counterexample_density();
    c.bench_function("k_functional", |b| b.iter(|| k_functional(black_box(&f))));
}

fn j_integral(c: &mut Criterion) {
    let g = PerturbationG::explicit();
    let mut group = c.benchmark_group("compute_j");
    group.sample_size(10);
    for step in [1e-2, 2e-3, 1e-3] {
        group.bench_with_input(BenchmarkId::from_parameter(step), &step, |b, &h| {
            b.iter(|| compute_j(black_box(&g), h).unwrap())
        });
    }
    group.finish();
}

fn entropy_estimators(c: &mut Criterion) {
    let mut group = c.benchmark_group("knn");
    group.sample_size(10);
    for n in [2, 4] {
        let x = batch(n, 20_000);
        group.bench_with_input(BenchmarkId::new("polar", n), &x, |b, x| b.iter(|| polar_entropy(x, 4).unwrap()));
        group.bench_with_input(BenchmarkId::new("raw", n), &x, |b, x| b.iter(|| knn_entropy(x, 4).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, densities, j_integral, entropy_estimators);
criterion_main!(benches);
