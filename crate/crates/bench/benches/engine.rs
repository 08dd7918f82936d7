use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use tissuelight_core::phantom::{sample_grf, sample_inputs, GrfSpec};
use tissuelight_core::{simulate, simulate_with_jvp, GeneratorId, GridSpec, SigmaParams, SimConfig, TissueRanges};

fn transport(c: &mut Criterion) {
    let grid = GridSpec::square(16, 0.015).unwrap();
    let (phantom, direction) = sample_inputs(GeneratorId::Id1, &grid, &TissueRanges::default(), 1).unwrap();
    let config = SimConfig::default().with_photons(20_000);
    let mut group = c.benchmark_group("transport");
    group.sample_size(10);
    group.throughput(Throughput::Elements(config.photon_count));
    group.bench_function("energy", |b| b.iter(|| simulate(black_box(&phantom.optical), &config).unwrap()));
    group.bench_function("energy_and_derivative", |b| {
        b.iter(|| simulate_with_jvp(black_box(&phantom.optical), &direction, &config).unwrap())
    });
    group.finish();
}

fn random_field(c: &mut Criterion) {
    let spec = GrfSpec::new(0.1, 1.0, 0.0).unwrap();
    let mut group = c.benchmark_group("grf");
    for n in [64usize, 256] {
        let grid = GridSpec::square(n, 0.015).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &grid, |b, g| {
            b.iter(|| sample_grf(g, &spec, black_box(3)).unwrap())
        });
    }
    group.finish();
}

fn sigma(c: &mut Criterion) {
    let p = SigmaParams::energy_default();
    // Log-spaced over all three regimes, both signs.
    let n = 65_536;
    let xs: Vec<f64> = (0..n)
        .map(|i| {
            let x = 10f64.powf(-3.0 + 9.0 * i as f64 / n as f64);
            if i % 2 == 0 { x } else { -x }
        })
        .collect();
    let mut group = c.benchmark_group("sigma");
    group.throughput(Throughput::Elements(xs.len() as u64));
    group.bench_function("apply", |b| b.iter(|| xs.iter().map(|&x| p.apply(black_box(x))).sum::<f64>()));
    group.bench_function("derivative", |b| {
        b.iter(|| xs.iter().map(|&x| p.derivative(black_box(x))).sum::<f64>())
    });
    group.finish();
}

criterion_group!(benches, transport, random_field, sigma);
criterion_main!(benches);
