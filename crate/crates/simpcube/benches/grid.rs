//! Parallel versus sequential cell processing across grid sizes.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use simpcube::composite::{certify, certify_seq, tightness_scan, tightness_scan_seq, CellBound};
use simpcube::{Rectangle, Tolerances, WithMixed};

type FnPair = WithMixed<fn(f64, f64) -> f64, fn(f64, f64) -> f64>;

fn exp_sum() -> FnPair {
    WithMixed::new(|x, y| (x + y).exp(), |x, y| (x + y).exp())
}

fn bench_certify(c: &mut Criterion) {
    let rect = Rectangle::new(0.0, 1.5, 0.0, 1.5).unwrap();
    let tol = Tolerances::default();
    let f = exp_sum();
    let mut group = c.benchmark_group("certify");
    group.sample_size(10);
    for n in [4u32, 8, 16] {
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| {
            b.iter(|| certify(&f, &rect, n, n, &tol, &CellBound::Theorem4Empirical).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| certify_seq(&f, &rect, n, n, &tol, &CellBound::Theorem4Empirical).unwrap())
        });
    }
    group.finish();
}

fn bench_tightness(c: &mut Criterion) {
    let rect = Rectangle::new(0.0, 1.0, 0.0, 1.0).unwrap();
    let tol = Tolerances::default();
    let f = exp_sum();
    let grids = [1u32, 2, 4];
    let mut group = c.benchmark_group("tightness");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| tightness_scan(&f, &rect, &grids, &tol).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| tightness_scan_seq(&f, &rect, &grids, &tol).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_certify, bench_tightness);
criterion_main!(benches);
