use std::hint::black_box;

use ccp_bench::{two_groups, uniform};
use ccp_core::simulate;
use criterion::{criterion_group, criterion_main, Criterion};

fn bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_1000");
    group.sample_size(10);
    let small = uniform(20, 2);
    group.bench_function("uniform_20_t2", |b| {
        b.iter(|| simulate(black_box(&small), 1000, 1).unwrap())
    });
    // above the alias threshold
    let large = two_groups(100, 2, 0.3);
    group.bench_function("two_groups_100_t2", |b| {
        b.iter(|| simulate(black_box(&large), 1000, 1).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
