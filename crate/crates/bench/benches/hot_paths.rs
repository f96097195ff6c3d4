use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use mtc_core::distributions::fit_mle;
use mtc_core::gof::{ks_statistic, rank_models, sorted};
use mtc_core::rng::device_rng;
use mtc_core::traffic::simulate_chain;
use mtc_core::{DistSpec, Family, MarkovParams};

fn gpd_sample(n: usize) -> Vec<f64> {
    let spec = DistSpec::GeneralizedPareto { shape: 0.2, scale: 1.0 };
    spec.sample(n, &mut device_rng(1, 0))
}

fn ks(c: &mut Criterion) {
    let spec = DistSpec::GeneralizedPareto { shape: 0.2, scale: 1.0 };
    let mut group = c.benchmark_group("ks_statistic");
    for n in [1_000, 100_000] {
        let s = sorted(&gpd_sample(n));
        group.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| {
            b.iter(|| ks_statistic(black_box(s), |x| spec.cdf(x)).unwrap())
        });
    }
    group.finish();
}

fn fit(c: &mut Criterion) {
    let s = gpd_sample(10_000);
    let mut group = c.benchmark_group("fit_mle");
    group.sample_size(20);
    for family in [Family::GeneralizedPareto, Family::Weibull, Family::Gev] {
        group.bench_with_input(BenchmarkId::from_parameter(family), &s, |b, s| {
            b.iter(|| fit_mle(family, black_box(s)).unwrap())
        });
    }
    group.finish();
}

fn rank(c: &mut Criterion) {
    let s = gpd_sample(10_000);
    let mut group = c.benchmark_group("rank_models");
    group.sample_size(10);
    group.bench_function("all_families_10k", |b| b.iter(|| rank_models(black_box(&s), &Family::ALL).unwrap()));
    group.finish();
}

fn chain(c: &mut Criterion) {
    let params = MarkovParams::new(0.05, 0.5, 1.0).unwrap();
    c.bench_function("simulate_chain_1e5_slots", |b| {
        b.iter(|| simulate_chain("d", &params, black_box(100_000), &mut device_rng(3, 0)).unwrap())
    });
}

criterion_group!(benches, ks, fit, rank, chain);
criterion_main!(benches);
