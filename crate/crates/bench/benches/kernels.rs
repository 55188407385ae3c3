use std::f64::consts::TAU;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64 as C64;
use ppwpi_bench::{homodimer, pump_probe};
use ppwpi_core::propagators::build_block;
use ppwpi_core::signal::red_shifted_probe;
use ppwpi_core::{complex_erf, nested_gaussian_integral, BlockKind, NestedIntegralArgs, Site};

fn special(c: &mut Criterion) {
    let points = [C64::new(0.3, 0.2), C64::new(2.5, -1.5), C64::new(-6.0, 4.0), C64::new(1.0, 5.0)];
    c.bench_function("complex_erf", |b| {
        b.iter(|| points.iter().map(|&z| complex_erf(black_box(z)).unwrap()).sum::<C64>())
    });
    let args = NestedIntegralArgs::new(1.7, -4.2, 0.25 * TAU).unwrap();
    c.bench_function("nested_gaussian_integral", |b| b.iter(|| nested_gaussian_integral(black_box(args)).unwrap()));
}

fn blocks(c: &mut Criterion) {
    let mut group = c.benchmark_group("se_block");
    for n_max in [8, 16, 24] {
        let model = homodimer(n_max, 0.1).unwrap();
        let probe = red_shifted_probe(model.params(), 0.25 * TAU).unwrap();
        let kind = BlockKind::Se { from: Site::One, to: Site::One };
        group.bench_with_input(BenchmarkId::from_parameter(n_max), &n_max, |b, _| {
            b.iter(|| build_block(&model, &probe, kind).unwrap())
        });
    }
    group.finish();
}

fn anisotropy(c: &mut Criterion) {
    let mut group = c.benchmark_group("pp_anisotropy");
    group.sample_size(10);
    for n_max in [8, 16] {
        group.bench_with_input(BenchmarkId::from_parameter(n_max), &n_max, |b, &n| {
            b.iter(|| pump_probe(n, 0.25 * TAU, 0.37 * TAU).unwrap().pp_signal().unwrap().anisotropy)
        });
    }
    group.finish();
}

criterion_group!(benches, special, blocks, anisotropy);
criterion_main!(benches);
