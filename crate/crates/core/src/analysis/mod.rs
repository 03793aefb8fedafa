//! Ranking comparisons, nonparametric tests and trajectory clustering.

pub mod cluster;
pub mod cohort;
pub mod rank;
pub mod stats;
pub mod trajectory;

pub use cluster::{
    enrichment_ratio, kmeans_cluster, silhouette_score, standardize, Enrichment, KMeansFit,
};
pub use rank::{rank_scholars, ranking_delta, RankTable};
pub use stats::{mann_whitney_u, wilcoxon_signed_rank, Alternative, PValueMethod, TestResult};
pub use trajectory::{trajectory_features, TrajectoryFeatures};
