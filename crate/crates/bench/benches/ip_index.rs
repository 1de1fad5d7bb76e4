use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use ipclust::cluster::{kmeans, kmedoids_pam};
use ipclust::homogeneity::{p_value_monte_carlo, BinnedTable};
use ipclust::ip::ip_for_partition;
use ipclust::{
    pairwise_distances, ClusterConfig, GeneratorSpec, IpConfig, Metric, Setting, TestMode,
};

fn s1b() -> ipclust::DataMatrix {
    GeneratorSpec::for_setting(Setting::S1b, 1)
        .generate()
        .unwrap()
        .0
}

fn distances(c: &mut Criterion) {
    let data = s1b();
    c.bench_function("pairwise_distances n=250 d=5", |b| {
        b.iter(|| pairwise_distances(black_box(&data), Metric::Euclidean))
    });
}

fn clustering(c: &mut Criterion) {
    let data = s1b();
    let dist = pairwise_distances(&data, Metric::Euclidean);
    let config = ClusterConfig::default();
    c.bench_function("kmeans k=3 10 restarts", |b| {
        b.iter(|| kmeans(black_box(&data), 3, &config).unwrap())
    });
    c.bench_function("pam k=3", |b| {
        b.iter(|| kmedoids_pam(black_box(&dist), 3, &config).unwrap())
    });
}

fn index(c: &mut Criterion) {
    let data = s1b();
    let dist = pairwise_distances(&data, Metric::Euclidean);
    let partition = kmeans(&data, 2, &ClusterConfig::default()).unwrap();
    let asymptotic = IpConfig {
        mode: TestMode::Asymptotic,
        ..IpConfig::default()
    };
    c.bench_function("ip_for_partition k=2 asymptotic", |b| {
        b.iter(|| ip_for_partition(black_box(&dist), &partition, &asymptotic, 0).unwrap())
    });

    let table = BinnedTable::new(vec![40, 30, 20, 10], vec![25, 25, 25, 25]).unwrap();
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(20);
    group.bench_function("p_value b=10000 2x4", |b| {
        b.iter(|| p_value_monte_carlo(black_box(&table), 10_000, 3).unwrap())
    });
    group.finish();
}

criterion_group!(benches, distances, clustering, index);
criterion_main!(benches);
