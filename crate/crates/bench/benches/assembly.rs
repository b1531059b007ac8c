use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use toeplitz_bench::Fixture;
use toeplitz_core::calculus::{hs_function_of_operator, ChiSpec, HsSpec};
use toeplitz_core::toeplitz::{assemble, compose, operator_norm};
use toeplitz_core::{build_basis, build_quadrature, ModelGeometry, QuadratureSpec};

fn quadrature(c: &mut Criterion) {
    let mut group = c.benchmark_group("quadrature");
    for n in [32usize, 128] {
        let basis = build_basis(&ModelGeometry::bargmann(), n, 1.2).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &basis, |b, basis| {
            b.iter(|| build_quadrature(black_box(basis), &QuadratureSpec::default()).unwrap())
        });
    }
    group.finish();
}

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble");
    group.sample_size(10);
    for n in [32usize, 64, 128] {
        let fx = Fixture::bargmann(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &fx, |b, fx| {
            b.iter(|| assemble(black_box(&fx.symbol), &fx.basis, &fx.rule).unwrap())
        });
    }
    group.finish();
}

fn composition(c: &mut Criterion) {
    let mut group = c.benchmark_group("compose_norm");
    group.sample_size(10);
    for n in [64usize, 128] {
        let t = Fixture::bargmann(n).matrix();
        group.bench_with_input(BenchmarkId::from_parameter(n), &t, |b, t| {
            b.iter(|| operator_norm(&compose(black_box(t), t).unwrap()))
        });
    }
    group.finish();
}

fn helffer_sjostrand(c: &mut Criterion) {
    let mut group = c.benchmark_group("helffer_sjostrand");
    group.sample_size(10);
    let t = Fixture::projective(16).matrix();
    let ext = ChiSpec::bump(2.0, 1.0).extension(0.5, 4).unwrap();
    let spec = HsSpec {
        tolerance: 1e-3,
        ..HsSpec::default()
    };
    group.bench_function("cp1_16", |b| {
        b.iter(|| hs_function_of_operator(black_box(&t), &ext, &spec).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    quadrature,
    assembly,
    composition,
    helffer_sjostrand
);
criterion_main!(benches);
