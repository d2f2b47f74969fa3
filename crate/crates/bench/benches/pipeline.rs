use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use evdim::gev::{gev_quantile, GevParams};
use evdim::gof::model_selection;
use evdim::lmoments::{bootstrap_ci, fit};
use evdim::observables::stream_block_minima;
use evdim::rng::{Purpose, RngStream};
use evdim::SystemSpec;

fn gev_sample(n: usize) -> Vec<f64> {
    let params = GevParams::new(2.0, 0.6, 0.1).unwrap();
    (0..n).map(|i| gev_quantile(&params, (i as f64 + 0.5) / n as f64).unwrap()).rev().collect()
}

fn streaming(c: &mut Criterion) {
    let k = 1_000_000;
    let mut group = c.benchmark_group("stream_block_minima");
    group.throughput(Throughput::Elements(k as u64));
    group.sample_size(10);
    for system in [SystemSpec::cantor(), SystemSpec::Sierpinski, SystemSpec::henon_classical()] {
        let burn_in = system.default_burn_in();
        let center = system.select_center(&mut RngStream::keyed(7, Purpose::Center, 0, 0, 0), burn_in).unwrap();
        let start = system.select_center(&mut RngStream::keyed(7, Purpose::Start, 0, 0, 0), burn_in).unwrap();
        group.bench_function(BenchmarkId::from_parameter(system.tag()), |b| {
            b.iter(|| {
                let mut rng = RngStream::keyed(7, Purpose::Orbit, 0, 0, 0);
                stream_block_minima(&system, start, center, k, &[100, 1000], &mut rng).unwrap()
            })
        });
    }
    group.finish();
}

fn fitting(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit");
    for n in [1000, 10_000] {
        let sample = gev_sample(n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("lmoments", n), &sample, |b, s| b.iter(|| fit(black_box(s)).unwrap()));
        group.bench_with_input(BenchmarkId::new("ks_ranking", n), &sample, |b, s| {
            b.iter(|| model_selection(black_box(s)).unwrap())
        });
    }
    group.finish();
}

fn bootstrap(c: &mut Criterion) {
    let sample = gev_sample(1000);
    let mut group = c.benchmark_group("bootstrap");
    group.sample_size(10);
    group.bench_function("b1000_n1000", |b| {
        b.iter(|| {
            let mut rng = RngStream::keyed(7, Purpose::Bootstrap, 0, 0, 0);
            bootstrap_ci(black_box(&sample), 1000, 0.95, &mut rng).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, streaming, fitting, bootstrap);
criterion_main!(benches);
