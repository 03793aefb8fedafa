//! Citation-distance scholar metrics.
//!
//! The crate ingests a citation corpus, builds yearly sliding-window
//! co-authorship networks, annotates every citation with the collaborative
//! distance between citing and cited authors, and derives per-scholar
//! indicators (`np`, `tc`, h-index, c-index and the distance-weighted
//! x-index). The [`analysis`] module holds the ranking, hypothesis-testing
//! and trajectory-clustering tools used to compare those indicators, and
//! [`synth`] generates deterministic corpora with known archetypes.
//!
//! Pipeline order:
//!
//! 1. [`corpus::parse_records`] / [`corpus::CorpusIndex::build`]
//! 2. [`collabnet::CollabNetwork::build_window`]
//! 3. [`distance::distances_for_year`] and [`distance::average_citation_distance`]
//! 4. [`metrics::metrics_as_of`]

pub mod analysis;
pub mod collabnet;
pub mod corpus;
pub mod distance;
mod error;
pub mod metrics;
pub mod rng;
pub mod synth;
pub mod tables;

pub use collabnet::{CollabNetwork, LccStats, NodeSet, StatsOptions};
pub use corpus::{AuthorIdx, Citation, CorpusIndex, IngestReport, PaperIdx, PaperRecord};
pub use distance::{CitationDistanceRecord, Distance, DistanceTable, YearContext, YearContexts};
pub use error::{Error, Result};
pub use metrics::ScholarMetrics;
