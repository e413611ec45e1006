use criterion::{criterion_group, criterion_main, Criterion};
use delaycert_core::catalog::run_all;
use delaycert_core::dde_model::corpus::{c1, c2};
use delaycert_core::dde_model::{Equation, InitialCondition};
use delaycert_core::funcmodel::{extreme, ExtremeKind, ScanConfig, TimeFunction, Window};
use delaycert_core::mmatrix::{is_m_matrix, SquareMatrix};
use delaycert_core::solver::{compute_phi, integrate};
use std::hint::black_box;

fn bounds(c: &mut Criterion) {
    let f = TimeFunction::window_integral(
        TimeFunction::abs(TimeFunction::sinusoid(0.0, 1.0, 2.0, 0.0)),
        TimeFunction::constant(0.2),
    );
    let scan = ScanConfig::default();
    c.bench_function("limsup of a window integral", |b| {
        b.iter(|| extreme(black_box(&f), Window::halfline(0.0), ExtremeKind::Limsup, &scan))
    });
}

fn catalog(c: &mut Criterion) {
    let eq = c2();
    c.bench_function("run all tests on C2", |b| b.iter(|| run_all(black_box(&eq))));
}

fn solver(c: &mut Criterion) {
    let eq = Equation::Linear(c1(1.0, 1.0));
    let ic = InitialCondition::constant(1.0);
    c.bench_function("integrate C1 to t = 20", |b| {
        b.iter(|| integrate(black_box(&eq), &ic, 20.0, 1e-3).unwrap())
    });
    let mut group = c.benchmark_group("phi");
    group.sample_size(10);
    group.bench_function("compute_phi(1.0)", |b| b.iter(|| compute_phi(black_box(1.0)).unwrap()));
    group.finish();
}

fn mmatrix(c: &mut Criterion) {
    let m = SquareMatrix::new(3, vec![2.0, -0.5, -0.3, -0.4, 1.5, -0.2, -0.1, -0.6, 1.8]).unwrap();
    c.bench_function("is_m_matrix 3x3", |b| b.iter(|| is_m_matrix(black_box(&m))));
}

criterion_group!(benches, bounds, catalog, solver, mmatrix);
criterion_main!(benches);
