//! Per-scholar indicators: `np`, `tc`, h-index, c-index and x-index.
//!
//! Each citation contributes `w(d) = 1 - exp(-d / d_bar)` to the x-index,
//! where `d_bar` is the average citation distance of the citation's year.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorIdx, CorpusIndex};
use crate::distance::{CitationDistanceRecord, Distance, DistanceTable, YearContexts};
use crate::error::{Error, Result};

const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Weight of a citation at distance `d` under normalizer `d_bar`.
///
/// `Finite(0)` maps to exactly 0 and `Infinite` to exactly 1. A depth-capped
/// distance is weighted at its lower bound. Finite distances far beyond
/// `d_bar` would round to 1.0, so they are held at the largest double below 1.
pub fn weight(d: Distance, d_bar: f64) -> Result<f64> {
    if !(d_bar > 0.0 && d_bar.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "d_bar must be positive, got {d_bar}"
        )));
    }
    Ok(match d {
        Distance::Infinite => 1.0,
        Distance::Finite(0) => 0.0,
        Distance::Finite(d) | Distance::AtLeast(d) => {
            (-(-(f64::from(d) / d_bar)).exp_m1()).min(BELOW_ONE)
        }
    })
}

/// Sum of citation weights, each normalized by its citing year's `d_bar`.
/// Records are summed in (cited, citing, citing_year, distance) order.
pub fn x_index(records: &[CitationDistanceRecord], contexts: &YearContexts) -> Result<f64> {
    let mut sorted: Vec<&CitationDistanceRecord> = records.iter().collect();
    sorted.sort_unstable_by_key(|r| (r.cited, r.citing, r.citing_year, r.distance));
    let mut x = 0.0;
    for r in sorted {
        x += weight(r.distance, contexts.get(r.citing_year)?.d_bar)?;
    }
    Ok(x)
}

/// Largest `h` such that at least `h` papers have `>= h` citations.
pub fn h_index(counts: &[u64]) -> u64 {
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted
        .iter()
        .enumerate()
        .take_while(|&(i, &c)| c > i as u64)
        .count() as u64
}

/// Largest `c` such that at least `c` citations have distance `>= c`.
/// Infinite distances clear every threshold.
pub fn c_index(distances: &[Distance]) -> u64 {
    let mut sorted = distances.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted
        .iter()
        .enumerate()
        .take_while(|&(i, d)| d.at_least(i as u64 + 1))
        .count() as u64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScholarMetrics {
    pub author_id: String,
    pub as_of_year: i32,
    pub np: u64,
    pub tc: u64,
    pub h: u64,
    pub c: u64,
    pub x: f64,
    pub n_inf: u64,
}

/// Indicators for one author, counting papers published and citations made
/// up to and including `cutoff`.
pub fn metrics_for_author(
    corpus: &CorpusIndex,
    table: &DistanceTable,
    contexts: &YearContexts,
    author: AuthorIdx,
    cutoff: i32,
) -> Result<ScholarMetrics> {
    let mut np = 0;
    let mut per_paper = Vec::new();
    let mut distances = Vec::new();
    let mut x = 0.0;
    for &paper in corpus.author_papers(author) {
        if corpus.paper_year(paper) <= cutoff {
            np += 1;
        }
        let mut cited = 0u64;
        for r in table.citations_of(paper) {
            if r.citing_year > cutoff {
                continue;
            }
            cited += 1;
            distances.push(r.distance);
            x += weight(r.distance, contexts.get(r.citing_year)?.d_bar)?;
        }
        if cited > 0 {
            per_paper.push(cited);
        }
    }
    Ok(ScholarMetrics {
        author_id: corpus.author_id(author).to_owned(),
        as_of_year: cutoff,
        np,
        tc: distances.len() as u64,
        h: h_index(&per_paper),
        c: c_index(&distances),
        x,
        n_inf: distances
            .iter()
            .filter(|d| **d == Distance::Infinite)
            .count() as u64,
    })
}

/// Indicators for `author_id` as of `cutoff`.
pub fn metrics_as_of(
    corpus: &CorpusIndex,
    table: &DistanceTable,
    contexts: &YearContexts,
    author_id: &str,
    cutoff: i32,
) -> Result<ScholarMetrics> {
    let author = corpus
        .author_idx(author_id)
        .ok_or_else(|| Error::UnknownAuthor(author_id.to_owned()))?;
    metrics_for_author(corpus, table, contexts, author, cutoff)
}

/// Indicators for every author with at least one paper published by
/// `cutoff`, in author id order. Runs on the ambient rayon pool.
pub fn all_metrics_as_of(
    corpus: &CorpusIndex,
    table: &DistanceTable,
    contexts: &YearContexts,
    cutoff: i32,
) -> Result<Vec<ScholarMetrics>> {
    let results: Vec<Result<Option<ScholarMetrics>>> = (0..corpus.author_count() as u32)
        .into_par_iter()
        .map(|a| {
            let m = metrics_for_author(corpus, table, contexts, AuthorIdx(a), cutoff)?;
            Ok((m.np > 0).then_some(m))
        })
        .collect();
    results.into_iter().filter_map(Result::transpose).collect()
}

/// Cumulative x-index of an author as of each of the given calendar years.
pub fn x_series(
    corpus: &CorpusIndex,
    table: &DistanceTable,
    contexts: &YearContexts,
    author: AuthorIdx,
    years: &[i32],
) -> Result<Vec<f64>> {
    years
        .iter()
        .map(|&y| metrics_for_author(corpus, table, contexts, author, y).map(|m| m.x))
        .collect()
}
