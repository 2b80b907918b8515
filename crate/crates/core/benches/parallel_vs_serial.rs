//! Data-parallel kernels against a single-thread pool: the Pfaffian
//! contraction, a total-Q quadrature, and one log-kernel convolution.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qflat_core::field::field_sphere_stereographic;
use qflat_core::normal::density_gaussian;
use qflat_core::quadrature::{log_kernel_convolution, QuadratureSpec};
use qflat_core::quantization::total_q_integral;
use qflat_core::tensor::{pfaffian_from_riemann, riemann_from_second_form, SymTensor2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    vec![
        (
            "single-thread",
            rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .unwrap(),
        ),
        (
            "multi-thread",
            rayon::ThreadPoolBuilder::new().build().unwrap(),
        ),
    ]
}

fn bench_pfaffian(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 6;
    let l = SymTensor2::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let rm = riemann_from_second_form(&l);
    let mut group = c.benchmark_group("pfaffian_n6");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &rm, |b, rm| {
            b.iter(|| pool.install(|| pfaffian_from_riemann(rm).unwrap()))
        });
    }
    group.finish();
}

fn bench_total_q(c: &mut Criterion) {
    let w = field_sphere_stereographic(4).unwrap();
    let spec = QuadratureSpec::with_tols(1e-7, 1e-10);
    let mut group = c.benchmark_group("total_q_sphere");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &w, |b, w| {
            b.iter(|| pool.install(|| total_q_integral(w, &spec, 60.0).unwrap().value))
        });
    }
    group.finish();
}

fn bench_convolution(c: &mut Criterion) {
    let d = density_gaussian(20.0, 0.8).unwrap();
    let spec = QuadratureSpec::with_tols(1e-7, 1e-10);
    let x = [0.7, -0.3, 0.2, 0.0];
    let mut group = c.benchmark_group("log_kernel_convolution");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &d, |b, d| {
            b.iter(|| {
                pool.install(|| log_kernel_convolution(&d.density_fn(), &x, &spec).unwrap().value)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_pfaffian, bench_total_q, bench_convolution);
criterion_main!(benches);
