use std::hint::black_box;

use citedist_bench::{citation_counts, citation_distances, synthetic_corpus, trajectory_points};
use citedist_core::analysis::{kmeans_cluster, silhouette_score};
use citedist_core::collabnet::graph_stats;
use citedist_core::distance::{distances_for_year, DistanceOptions};
use citedist_core::metrics::{c_index, h_index};
use citedist_core::{CollabNetwork, StatsOptions};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

fn network(c: &mut Criterion) {
    let corpus = synthetic_corpus();
    let year = corpus.year_range().unwrap().1;
    c.bench_function("build_window", |b| {
        b.iter(|| CollabNetwork::build_window(&corpus, black_box(year), 5).unwrap())
    });
    let net = CollabNetwork::build_window(&corpus, year, 5).unwrap();
    c.bench_function("distances_for_year", |b| {
        b.iter(|| distances_for_year(&corpus, &net, &DistanceOptions::default()))
    });
    let opts = StatsOptions {
        sample_pairs: 2_000,
        exact_threshold: 0,
        ..StatsOptions::default()
    };
    c.bench_function("graph_stats_sampled", |b| {
        b.iter(|| graph_stats(&net, &opts))
    });
}

fn indices(c: &mut Criterion) {
    let counts = citation_counts(10_000, 1);
    c.bench_function("h_index_10k", |b| b.iter(|| h_index(black_box(&counts))));
    let distances = citation_distances(100_000, 1);
    c.bench_function("c_index_100k", |b| {
        b.iter(|| c_index(black_box(&distances)))
    });
}

fn clustering(c: &mut Criterion) {
    let points = trajectory_points(2_000);
    let mut group = c.benchmark_group("clustering");
    group.sample_size(10);
    group.bench_function("kmeans_k2", |b| {
        b.iter_batched(
            || points.clone(),
            |p| kmeans_cluster(&p, 2, 0).unwrap(),
            BatchSize::LargeInput,
        )
    });
    let labels = kmeans_cluster(&points, 2, 0).unwrap().labels;
    group.bench_function("silhouette", |b| {
        b.iter(|| silhouette_score(&points, &labels).unwrap())
    });
    group.finish();
}

criterion_group!(benches, network, indices, clustering);
criterion_main!(benches);
