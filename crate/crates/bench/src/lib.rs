//! Fixtures shared by the criterion benches in `benches/`.

use citedist_core::analysis::{standardize, trajectory_features};
use citedist_core::rng::substream;
use citedist_core::synth::{generate_corpus, generate_trajectories, SynthConfig, TrajectoryConfig};
use citedist_core::{CorpusIndex, Distance};
use rand::Rng;

/// Indexed corpus from the default synthetic configuration.
pub fn synthetic_corpus() -> CorpusIndex {
    let synth = generate_corpus(&SynthConfig::default()).expect("default config is valid");
    CorpusIndex::build(synth.records).expect("synthetic corpus indexes")
}

/// Standardized trajectory features for `n` synthetic scholars.
pub fn trajectory_points(n: usize) -> Vec<Vec<f64>> {
    let cfg = TrajectoryConfig {
        n_scholars: n,
        ..TrajectoryConfig::default()
    };
    let raw: Vec<Vec<f64>> = generate_trajectories(&cfg)
        .expect("trajectory config is valid")
        .iter()
        .map(|t| {
            trajectory_features(&t.series)
                .expect("ten values")
                .to_vector()
                .to_vec()
        })
        .collect();
    standardize(&raw)
}

/// Per-paper citation counts with a heavy tail.
pub fn citation_counts(n: usize, seed: u64) -> Vec<u64> {
    let mut rng = substream(seed, "bench-counts", 0);
    (0..n)
        .map(|_| (1.0 / rng.random_range(0.001..1.0f64)) as u64)
        .collect()
}

/// Citation distances, about one in twenty infinite.
pub fn citation_distances(n: usize, seed: u64) -> Vec<Distance> {
    let mut rng = substream(seed, "bench-distances", 0);
    (0..n)
        .map(|_| {
            if rng.random_bool(0.05) {
                Distance::Infinite
            } else {
                Distance::Finite(rng.random_range(0..12))
            }
        })
        .collect()
}
