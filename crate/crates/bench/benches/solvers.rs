use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use capshock_bench::{params, system};
use capshock_core::contour::evans_contour;
use capshock_core::evans::evans;
use capshock_core::profile::solve_profile_default;
use capshock_core::ContourSpec;

fn profile_solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("profile");
    for (v, d) in [(0.45, 0.45), (0.15, 0.45), (0.4, 0.05)] {
        let p = params(v, d);
        g.bench_function(format!("v{v}_d{d}"), |b| b.iter(|| solve_profile_default(black_box(&p)).unwrap()));
    }
    g.finish();
}

fn evans_point(c: &mut Criterion) {
    let sys = system(0.45, 0.45);
    let mut g = c.benchmark_group("evans");
    for l in [Complex64::new(0.5, 0.5), Complex64::new(0.0, 10.0), Complex64::new(1e-4, 0.0)] {
        g.bench_function(format!("{l}"), |b| b.iter(|| evans(black_box(l), &sys).unwrap()));
    }
    g.finish();
}

fn contour(c: &mut Criterion) {
    let sys = system(0.45, 0.45);
    let spec = ContourSpec::default();
    let mut g = c.benchmark_group("contour");
    g.sample_size(10);
    g.bench_function("v0.45_d0.45", |b| b.iter(|| evans_contour(&sys, &spec).unwrap()));
    g.finish();
}

criterion_group!(benches, profile_solve, evans_point, contour);
criterion_main!(benches);
