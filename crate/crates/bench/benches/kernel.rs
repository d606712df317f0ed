use criterion::{black_box, criterion_group, criterion_main, Criterion};
use szego_core::kernel_terms::{base_integral, residue_sum, TermContext};
use szego_core::reproducing::{pair, TestFunction, DEFAULT_DELTA_B};
use szego_core::*;

fn params() -> DomainParams {
    make_params(2.0 * std::f64::consts::PI, None).unwrap()
}

fn kernel_eval(c: &mut Criterion) {
    let p = params();
    let w = Point::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let z = Point::new(Complex64::new(0.4, 0.2), Complex64::new(0.9, 0.1));
    c.bench_function("kernel/origin", |b| b.iter(|| kernel(&p, black_box(&w), black_box(&w)).unwrap()));
    c.bench_function("kernel/off_diagonal", |b| b.iter(|| kernel(&p, black_box(&w), black_box(&z)).unwrap()));
    c.bench_function("kernel/contour_route", |b| {
        b.iter(|| kernel_via(&p, black_box(&w), black_box(&z), Route::ResiduePlusContour).unwrap())
    });
}

fn terms(c: &mut Criterion) {
    let p = params();
    let ctx = TermContext::from_tau(p, 3, Complex64::new(1.0, 0.3));
    c.bench_function("terms/base_integral", |b| b.iter(|| base_integral(black_box(&ctx)).unwrap()));
    let tl = TauLambda::new(&p, Complex64::new(1.0, 0.3), Complex64::new(0.8, 0.2));
    c.bench_function("terms/residue_sum", |b| b.iter(|| residue_sum(&p, black_box(&tl)).unwrap()));
}

fn pairing(c: &mut Criterion) {
    let p = params();
    let f = TestFunction::new(0, 0.0, 3.0).unwrap();
    let z = Point::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let mut g = c.benchmark_group("reproducing");
    g.sample_size(10);
    g.bench_function("pair/mode0", |b| b.iter(|| pair(&p, &f, black_box(&z), DEFAULT_DELTA_B).unwrap()));
    g.finish();
}

criterion_group!(benches, kernel_eval, terms, pairing);
criterion_main!(benches);
