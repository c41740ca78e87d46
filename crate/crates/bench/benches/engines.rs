use std::hint::black_box;

use ccp_bench::{linear, two_groups, uniform};
use ccp_core::{solve, EngineChoice};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn uda(c: &mut Criterion) {
    let mut group = c.benchmark_group("uda_t3");
    group.sample_size(10);
    for n in [25, 50, 100] {
        let p = uniform(n, 3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| solve(black_box(p), EngineChoice::Uda).unwrap())
        });
    }
    group.finish();
}

fn dpsa(c: &mut Criterion) {
    let mut group = c.benchmark_group("dpsa_two_groups_t2");
    group.sample_size(10);
    for n in [20, 40, 80] {
        let p = two_groups(n, 2, 0.3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| solve(black_box(p), EngineChoice::Dpsa).unwrap())
        });
    }
    group.finish();
}

fn ba(c: &mut Criterion) {
    let mut group = c.benchmark_group("ba_linear_t2");
    group.sample_size(10);
    for n in [6, 8, 10] {
        let p = linear(n, n, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| solve(black_box(p), EngineChoice::Ba).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, uda, dpsa, ba);
criterion_main!(benches);
