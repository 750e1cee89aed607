use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use szlab_core::asym_coeffs::ga;
use szlab_core::ensembles;
use szlab_core::func_classes::{abs_pow, bump, eta_fn};
use szlab_core::hs_calculus::hs_apply;
use szlab_core::qa_extension::build_extension;
use szlab_core::wiener_hopf::{spectrum, symbol_registry};
use szlab_core::{DomainSpec, QuadratureSpec, WHModel, C64};

fn hs(c: &mut Criterion) {
    let a = ensembles::gue(32, &mut ensembles::rng(0)).scale(0.5);
    let smooth = build_extension(&bump(3)).unwrap();
    let rough = build_extension(&abs_pow(0.5, 2)).unwrap();
    let spec = QuadratureSpec::with_tolerance(1e-6);
    c.bench_function("hs_apply bump m=32", |b| b.iter(|| hs_apply(&smooth, black_box(&a), &spec).unwrap()));
    c.bench_function("hs_apply abs_pow m=32", |b| b.iter(|| hs_apply(&rough, black_box(&a), &spec).unwrap()));
}

fn wh(c: &mut Criterion) {
    let m = WHModel::new(DomainSpec::unit_disk(), DomainSpec::unit_disk(), 8.0, 48, 4.0).unwrap();
    let one = symbol_registry("one").unwrap();
    let mut g = c.benchmark_group("spectrum");
    g.sample_size(10);
    g.bench_function("disk alpha=8 N=48", |b| b.iter(|| spectrum(black_box(&m), &one, None).unwrap()));
    g.finish();
}

fn transform(c: &mut Criterion) {
    let g = eta_fn(1.0);
    c.bench_function("ga eta s=0.7", |b| b.iter(|| ga(&g, black_box(C64::new(0.7, 0.0))).unwrap()));
}

criterion_group!(benches, hs, wh, transform);
criterion_main!(benches);
