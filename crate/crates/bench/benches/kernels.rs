use criterion::{black_box, criterion_group, criterion_main, Criterion};

use stepanov_bench::{gaussian_law, levitan_and_sine, small_periodic};
use stepanov_core::ap::{distance, scan_almost_periods};
use stepanov_core::corpus::{run_scenario, SolverChoice};
use stepanov_core::law::{dbl, wasserstein};
use stepanov_core::MetricKind;

fn metrics(c: &mut Criterion) {
    let (h, s) = levitan_and_sine(200.0, 1e-2);
    let mut g = c.benchmark_group("distance");
    for m in [MetricKind::Uniform, MetricKind::stepanov(2.0), MetricKind::measure()] {
        g.bench_function(m.label(), |b| {
            b.iter(|| distance(black_box(&h), black_box(&s), &m).unwrap())
        });
    }
    g.finish();
}

fn scans(c: &mut Criterion) {
    let (h, _) = levitan_and_sine(200.0, 1e-2);
    let mut g = c.benchmark_group("scan_1000_shifts");
    g.sample_size(10);
    for m in [MetricKind::Uniform, MetricKind::stepanov(1.0)] {
        g.bench_function(m.label(), |b| {
            b.iter(|| scan_almost_periods(black_box(&h), 0.3, &m, (0.1, 100.0), 0.1).unwrap())
        });
    }
    g.finish();
}

fn transport(c: &mut Criterion) {
    let mut g = c.benchmark_group("law_distance");
    let (a1, b1) = (gaussian_law(1, 5000, 0.0, 1), gaussian_law(1, 5000, 0.3, 2));
    g.bench_function("w2_quantile_5000", |b| b.iter(|| wasserstein(&a1, &b1, 2.0).unwrap()));
    let (a2, b2) = (gaussian_law(2, 128, 0.0, 3), gaussian_law(2, 128, 0.3, 4));
    g.bench_function("w2_assignment_2d_128", |b| {
        b.iter(|| wasserstein(&a2, &b2, 2.0).unwrap())
    });
    let (a3, b3) = (gaussian_law(2, 200, 0.0, 5), gaussian_law(2, 200, 0.3, 6));
    g.bench_function("dbl_2d_200", |b| b.iter(|| dbl(&a3, &b3).unwrap()));
    g.finish();
}

fn picard(c: &mut Criterion) {
    let s = small_periodic(100);
    let mut g = c.benchmark_group("solver");
    g.sample_size(10);
    g.bench_function("picard_periodic_100", |b| {
        b.iter(|| run_scenario(&s, SolverChoice::Picard).unwrap())
    });
    g.bench_function("euler_periodic_100", |b| {
        b.iter(|| run_scenario(&s, SolverChoice::ExponentialEuler).unwrap())
    });
    g.finish();
}

criterion_group!(benches, metrics, scans, transport, picard);
criterion_main!(benches);
