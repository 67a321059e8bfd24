use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lojax_core::charpoly::{charpoly_exact, charpoly_numeric, default_radii, default_rays};
use lojax_core::exponent::{empirical_verify, ShellConfig};
use lojax_core::fibres::FibreConfig;
use lojax_core::milnor::Germ;

fn brieskorn(a: u32, b: u32) -> Germ {
    Germ::parse(&format!("x^{a} + y^{b}"), &["x", "y"]).unwrap()
}

fn milnor(c: &mut Criterion) {
    let mut group = c.benchmark_group("milnor_number");
    for (a, b) in [(2, 3), (3, 4), (4, 4), (5, 7)] {
        let f = brieskorn(a, b);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{a},{b}")), &f, |bch, f| {
            bch.iter(|| black_box(f).milnor_number().unwrap())
        });
    }
    group.finish();
}

fn exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("charpoly_exact");
    for (a, b) in [(2, 2), (3, 3), (3, 4), (4, 4)] {
        let f = brieskorn(a, b);
        let g = f.gradient();
        group.bench_with_input(BenchmarkId::from_parameter(format!("{a},{b}")), &f, |bch, f| {
            bch.iter(|| charpoly_exact(black_box(f), &g).unwrap())
        });
    }
    group.finish();
}

fn numeric(c: &mut Criterion) {
    let mut group = c.benchmark_group("charpoly_numeric");
    group.sample_size(10);
    let cfg = FibreConfig::default();
    for (a, b) in [(2, 2), (2, 3)] {
        let f = brieskorn(a, b);
        let g = f.gradient();
        let rays = default_rays(2, 0);
        let radii = default_radii();
        group.bench_with_input(BenchmarkId::from_parameter(format!("{a},{b}")), &f, |bch, f| {
            bch.iter(|| charpoly_numeric(black_box(f), &g, &rays, &radii, &cfg).unwrap())
        });
    }
    group.finish();
}

fn shells(c: &mut Criterion) {
    let f = brieskorn(3, 4);
    let cfg = ShellConfig::default();
    c.bench_function("empirical_verify/3,4", |bch| bch.iter(|| empirical_verify(black_box(&f), 0.75, &cfg).unwrap()));
}

criterion_group!(benches, milnor, exact, numeric, shells);
criterion_main!(benches);
