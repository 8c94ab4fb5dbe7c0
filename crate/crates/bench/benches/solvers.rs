use std::f64::consts::{FRAC_PI_2, TAU};
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use minerr_core::{check_global, simulate, solve_dual, solve_equiprobable_pure, BlochDirection, Ensemble};

fn trine() -> Ensemble {
    let dirs: Vec<_> = (0..3).map(|k| BlochDirection::from_angles(FRAC_PI_2, TAU * k as f64 / 3.0)).collect();
    Ensemble::pure_equiprobable(&dirs).unwrap()
}

/// Deterministic scattered states (golden-angle spiral).
fn spiral(n: usize) -> Ensemble {
    let dirs: Vec<_> = (0..n)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
            BlochDirection::from_angles(z.acos(), 2.399_963_229_728_653 * k as f64)
        })
        .collect();
    Ensemble::pure_equiprobable(&dirs).unwrap()
}

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_equiprobable_pure");
    group.bench_function("trine", |b| b.iter(|| solve_equiprobable_pure(black_box(&trine())).unwrap()));
    for n in [4, 8, 16] {
        let e = spiral(n);
        group.bench_with_input(BenchmarkId::new("spiral", n), &e, |b, e| {
            b.iter(|| solve_equiprobable_pure(black_box(e)).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_dual");
    group.sample_size(20);
    for n in [3, 8] {
        let e = spiral(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &e, |b, e| b.iter(|| solve_dual(black_box(e), 0).unwrap()));
    }
    group.finish();
}

fn certificate(c: &mut Criterion) {
    let e = spiral(8);
    let povm = solve_equiprobable_pure(&e).unwrap().canonical_povm;
    c.bench_function("check_global/8", |b| b.iter(|| check_global(black_box(&povm), black_box(&e)).unwrap()));
}

fn monte_carlo(c: &mut Criterion) {
    let e = trine();
    let povm = solve_equiprobable_pure(&e).unwrap().canonical_povm;
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    group.bench_function("trine/1e6", |b| b.iter(|| simulate(&e, &povm, 1_000_000, black_box(0)).unwrap()));
    group.finish();
}

criterion_group!(benches, solver, oracle, certificate, monte_carlo);
criterion_main!(benches);
