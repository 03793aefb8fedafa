//! Citation distances and yearly average citation distance.
//!
//! The distance of a citation is the shortest co-authorship path between any
//! author of the cited paper and any author of the citing paper, measured in
//! the network of the citing paper's publication year. A shared author gives
//! distance 0 whether or not that author is active in the window.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collabnet::{BfsScratch, CollabNetwork, NodeSet};
use crate::corpus::{AuthorIdx, Citation, CorpusIndex, PaperIdx};
use crate::error::{Error, Result};

/// Collaborative distance between two papers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Distance {
    Finite(u32),
    /// Not reached within a BFS depth cap; the true distance is at least
    /// this value and may be infinite.
    AtLeast(u32),
    Infinite,
}

impl Distance {
    pub fn is_finite(self) -> bool {
        matches!(self, Distance::Finite(_))
    }

    /// Whether the distance is known to be `>= threshold`.
    #[inline]
    pub fn at_least(self, threshold: u64) -> bool {
        match self {
            Distance::Finite(d) | Distance::AtLeast(d) => u64::from(d) >= threshold,
            Distance::Infinite => true,
        }
    }

    fn sort_key(self) -> (u64, u8) {
        match self {
            Distance::Finite(d) => (u64::from(d), 0),
            Distance::AtLeast(d) => (u64::from(d), 1),
            Distance::Infinite => (u64::MAX, 2),
        }
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::AtLeast(d) => write!(f, ">={d}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Distance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "inf" {
            Ok(Distance::Infinite)
        } else if let Some(rest) = s.strip_prefix(">=") {
            rest.parse()
                .map(Distance::AtLeast)
                .map_err(|e| format!("{s:?}: {e}"))
        } else {
            s.parse()
                .map(Distance::Finite)
                .map_err(|e| format!("{s:?}: {e}"))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CitationDistanceRecord {
    pub cited: PaperIdx,
    pub citing: PaperIdx,
    pub citing_year: i32,
    pub distance: Distance,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceOptions {
    /// Optional BFS depth cap. Unreached authors beyond it are recorded as
    /// `Distance::AtLeast(cap + 1)`.
    pub depth_cap: Option<u32>,
}

struct Scratch {
    bfs: BfsScratch,
    target_stamp: Vec<u32>,
    epoch: u32,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            bfs: BfsScratch::new(n),
            target_stamp: vec![0; n],
            epoch: 0,
        }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.target_stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.epoch
    }
}

fn nodes_of<'a>(
    net: &'a CollabNetwork,
    authors: &'a [AuthorIdx],
) -> impl Iterator<Item = u32> + 'a {
    authors.iter().filter_map(|&a| net.node_of(a))
}

fn shares_author(a: &[AuthorIdx], b: &[AuthorIdx]) -> bool {
    a.iter().any(|x| b.contains(x))
}

/// Minimum shortest-path length between any author in `authors_p` and any
/// author in `authors_q`.
pub fn paper_pair_distance(
    net: &CollabNetwork,
    authors_p: &[AuthorIdx],
    authors_q: &[AuthorIdx],
) -> Distance {
    if shares_author(authors_p, authors_q) {
        return Distance::Finite(0);
    }
    let targets: Vec<u32> = nodes_of(net, authors_q).collect();
    if targets.is_empty() {
        return Distance::Infinite;
    }
    let mut bfs = BfsScratch::new(net.node_count());
    let mut found = None;
    bfs.run(net, nodes_of(net, authors_p), None, |node, d| {
        if targets.contains(&node) {
            found = Some(d);
            true
        } else {
            false
        }
    });
    found.map_or(Distance::Infinite, Distance::Finite)
}

/// Distances for citations sharing the paper that seeds the BFS: the citing
/// paper when `from_citing`, else the cited one.
fn distances_for_group(
    corpus: &CorpusIndex,
    net: &CollabNetwork,
    group: &[Citation],
    from_citing: bool,
    opts: &DistanceOptions,
    scratch: &mut Scratch,
) -> Vec<CitationDistanceRecord> {
    let year = net.year();
    let ends = |c: &Citation| {
        if from_citing {
            (c.citing, c.cited)
        } else {
            (c.cited, c.citing)
        }
    };
    let seed_authors = corpus.paper_authors(ends(&group[0]).0);

    // Mark every node that some non-self partner could be measured from.
    let epoch = scratch.next_epoch();
    let mut remaining = 0usize;
    for c in group {
        let partner = corpus.paper_authors(ends(c).1);
        if shares_author(seed_authors, partner) {
            continue;
        }
        for node in nodes_of(net, partner) {
            if scratch.target_stamp[node as usize] != epoch {
                scratch.target_stamp[node as usize] = epoch;
                remaining += 1;
            }
        }
    }

    let has_sources = nodes_of(net, seed_authors).next().is_some();
    if remaining > 0 && has_sources {
        let Scratch {
            bfs, target_stamp, ..
        } = scratch;
        bfs.run(
            net,
            nodes_of(net, seed_authors),
            opts.depth_cap,
            |node, _| {
                if target_stamp[node as usize] == epoch {
                    remaining -= 1;
                }
                remaining == 0
            },
        );
    }

    group
        .iter()
        .map(|c| {
            let partner = corpus.paper_authors(ends(c).1);
            let distance = if shares_author(seed_authors, partner) {
                Distance::Finite(0)
            } else {
                let mut present = false;
                let best = nodes_of(net, partner)
                    .filter_map(|node| {
                        present = true;
                        if has_sources {
                            scratch.bfs.dist(node)
                        } else {
                            None
                        }
                    })
                    .min();
                match (best, opts.depth_cap) {
                    (Some(d), _) => Distance::Finite(d),
                    (None, Some(cap)) if present && has_sources => Distance::AtLeast(cap + 1),
                    (None, _) => Distance::Infinite,
                }
            };
            CitationDistanceRecord {
                cited: c.cited,
                citing: c.citing,
                citing_year: year,
                distance,
            }
        })
        .collect()
}

/// Distances of every citation made in `net.year()`, sorted by
/// (cited, citing).
///
/// One multi-source BFS is run per paper on one side of the year's
/// citations, seeded from its authors and stopped once every author of its
/// partners has been labeled. The side with fewer distinct papers is used;
/// distance is symmetric, so the choice does not affect the result. Work is
/// spread over the ambient rayon pool; the output order does not depend on it.
pub fn distances_for_year(
    corpus: &CorpusIndex,
    net: &CollabNetwork,
    opts: &DistanceOptions,
) -> Vec<CitationDistanceRecord> {
    let citations = corpus.citations_in_year(net.year());
    let distinct = |key: fn(&Citation) -> PaperIdx, sorted: &[Citation]| {
        sorted.chunk_by(|a, b| key(a) == key(b)).count()
    };
    let mut by_citing = citations.to_vec();
    by_citing.sort_unstable_by_key(|c| (c.citing, c.cited));
    let from_citing = distinct(|c| c.citing, &by_citing) < distinct(|c| c.cited, citations);
    let ordered: &[Citation] = if from_citing { &by_citing } else { citations };
    let groups: Vec<&[Citation]> = if from_citing {
        ordered.chunk_by(|a, b| a.citing == b.citing).collect()
    } else {
        ordered.chunk_by(|a, b| a.cited == b.cited).collect()
    };
    let per_group: Vec<Vec<CitationDistanceRecord>> = groups
        .par_iter()
        .map_init(
            || Scratch::new(net.node_count()),
            |scratch, group| distances_for_group(corpus, net, group, from_citing, opts, scratch),
        )
        .collect();
    let mut out: Vec<CitationDistanceRecord> = per_group.into_iter().flatten().collect();
    if from_citing {
        out.sort_unstable_by_key(|r| (r.cited, r.citing));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YearContext {
    pub year: i32,
    pub d_bar: f64,
    pub lambda: f64,
    /// Zero when the context was substituted from another year.
    pub valid_pair_count: u64,
    /// Year whose `d_bar` was reused, when this year had none of its own.
    pub substituted_from: Option<i32>,
}

impl YearContext {
    pub fn new(year: i32, d_bar: f64, valid_pair_count: u64) -> Result<Self> {
        if !(d_bar.is_finite() && d_bar > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "d_bar must be positive, got {d_bar}"
            )));
        }
        Ok(YearContext {
            year,
            d_bar,
            lambda: 1.0 / d_bar,
            valid_pair_count,
            substituted_from: None,
        })
    }
}

/// Mean citation distance over the year's valid pairs: citations where at
/// least one author of each paper lies in `lcc`.
pub fn average_citation_distance(
    records: &[CitationDistanceRecord],
    lcc: &NodeSet,
    corpus: &CorpusIndex,
    net: &CollabNetwork,
) -> Result<YearContext> {
    let year = net.year();
    let in_lcc = |p: PaperIdx| nodes_of(net, corpus.paper_authors(p)).any(|n| lcc.contains(n));
    let mut sum = 0u64;
    let mut count = 0u64;
    for r in records {
        debug_assert_eq!(r.citing_year, year);
        if !(in_lcc(r.cited) && in_lcc(r.citing)) {
            continue;
        }
        match r.distance {
            Distance::Finite(d) => {
                sum += u64::from(d);
                count += 1;
            }
            Distance::AtLeast(_) => return Err(Error::DepthCapped(year)),
            Distance::Infinite => unreachable!("both papers touch the LCC"),
        }
    }
    if count == 0 || sum == 0 {
        return Err(Error::DBarUndefined(year));
    }
    YearContext::new(year, sum as f64 / count as f64, count)
}

/// Result of computing one year end to end.
pub struct YearDistances {
    pub year: i32,
    pub records: Vec<CitationDistanceRecord>,
    pub context: Result<YearContext>,
    pub lcc_size: usize,
}

/// Build the year's network and compute its distances and context.
pub fn compute_year(
    corpus: &CorpusIndex,
    year: i32,
    window: u32,
    opts: &DistanceOptions,
) -> Result<YearDistances> {
    let net = CollabNetwork::build_window(corpus, year, window)?;
    let records = distances_for_year(corpus, &net, opts);
    let lcc = net.largest_connected_component();
    let context = average_citation_distance(&records, &lcc, corpus, &net);
    Ok(YearDistances {
        year,
        records,
        context,
        lcc_size: lcc.len(),
    })
}

/// Distances and resolved contexts for every citation year of a corpus.
pub struct AllDistances {
    pub table: DistanceTable,
    pub contexts: YearContexts,
    pub substitutions: Vec<Substitution>,
    pub lcc_sizes: BTreeMap<i32, usize>,
}

/// Run [`compute_year`] for every year in which a citation is made.
pub fn compute_all_years(
    corpus: &CorpusIndex,
    window: u32,
    opts: &DistanceOptions,
) -> Result<AllDistances> {
    let mut records = Vec::with_capacity(corpus.citation_count());
    let mut computed = BTreeMap::new();
    let mut lcc_sizes = BTreeMap::new();
    for year in corpus.citation_years().collect::<Vec<_>>() {
        let yd = compute_year(corpus, year, window, opts)?;
        records.extend(yd.records);
        computed.insert(year, yd.context);
        lcc_sizes.insert(year, yd.lcc_size);
    }
    let (contexts, substitutions) = YearContexts::resolve(computed);
    Ok(AllDistances {
        table: DistanceTable::new(corpus.paper_count(), records),
        contexts,
        substitutions,
        lcc_sizes,
    })
}

/// A year whose context had to be filled from elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    pub year: i32,
    pub source_year: Option<i32>,
    pub reason: String,
}

/// Per-year contexts keyed by citing year.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct YearContexts {
    contexts: BTreeMap<i32, YearContext>,
}

impl YearContexts {
    /// Resolve computed contexts; a year without its own `d_bar` reuses the
    /// nearest earlier year that has one. Years with no earlier source stay
    /// unresolved and are reported with `source_year: None`.
    pub fn resolve(computed: BTreeMap<i32, Result<YearContext>>) -> (Self, Vec<Substitution>) {
        let mut contexts = BTreeMap::new();
        let mut substitutions = Vec::new();
        let mut last_own: Option<YearContext> = None;
        for (year, result) in computed {
            match result {
                Ok(ctx) => {
                    last_own = Some(ctx);
                    contexts.insert(year, ctx);
                }
                Err(err) => {
                    let source = last_own.map(|src| {
                        contexts.insert(
                            year,
                            YearContext {
                                year,
                                d_bar: src.d_bar,
                                lambda: src.lambda,
                                valid_pair_count: 0,
                                substituted_from: Some(src.year),
                            },
                        );
                        src.year
                    });
                    substitutions.push(Substitution {
                        year,
                        source_year: source,
                        reason: err.to_string(),
                    });
                }
            }
        }
        (YearContexts { contexts }, substitutions)
    }

    pub fn from_contexts(contexts: impl IntoIterator<Item = YearContext>) -> Self {
        YearContexts {
            contexts: contexts.into_iter().map(|c| (c.year, c)).collect(),
        }
    }

    pub fn get(&self, year: i32) -> Result<&YearContext> {
        self.contexts
            .get(&year)
            .ok_or(Error::MissingYearContext(year))
    }

    pub fn iter(&self) -> impl Iterator<Item = &YearContext> {
        self.contexts.values()
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }
}

/// All citation distance records, indexed by cited paper.
#[derive(Clone, Debug, Default)]
pub struct DistanceTable {
    records: Vec<CitationDistanceRecord>,
    offsets: Vec<usize>,
}

impl DistanceTable {
    pub fn new(paper_count: usize, mut records: Vec<CitationDistanceRecord>) -> Self {
        records.sort_unstable_by_key(|r| (r.cited, r.citing, r.citing_year, r.distance));
        let mut offsets = vec![0usize; paper_count + 1];
        for r in &records {
            offsets[r.cited.index() + 1] += 1;
        }
        for i in 0..paper_count {
            offsets[i + 1] += offsets[i];
        }
        DistanceTable { records, offsets }
    }

    /// Records citing `paper`, sorted by citing paper.
    pub fn citations_of(&self, paper: PaperIdx) -> &[CitationDistanceRecord] {
        &self.records[self.offsets[paper.index()]..self.offsets[paper.index() + 1]]
    }

    /// All records in (cited, citing) order.
    pub fn records(&self) -> &[CitationDistanceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PaperRecord;

    fn rec(id: &str, year: i32, authors: &[&str], refs: &[&str]) -> PaperRecord {
        PaperRecord {
            paper_id: id.into(),
            year,
            author_ids: authors.iter().map(|s| s.to_string()).collect(),
            reference_ids: refs.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn authors(ids: &[u32]) -> Vec<AuthorIdx> {
        ids.iter().copied().map(AuthorIdx).collect()
    }

    #[test]
    fn distance_ordering_and_text() {
        let mut ds = vec![
            Distance::Infinite,
            Distance::AtLeast(3),
            Distance::Finite(3),
            Distance::Finite(0),
        ];
        ds.sort();
        assert_eq!(
            ds,
            [
                Distance::Finite(0),
                Distance::Finite(3),
                Distance::AtLeast(3),
                Distance::Infinite
            ]
        );
        for d in ds {
            assert_eq!(d.to_string().parse::<Distance>().unwrap(), d);
        }
        assert_eq!(Distance::Infinite.to_string(), "inf");
        assert!("x".parse::<Distance>().is_err());
    }

    #[test]
    fn pair_distance_cases() {
        let path = CollabNetwork::from_edges(3, &[(0, 1), (1, 2)]);
        assert_eq!(
            paper_pair_distance(&path, &authors(&[0]), &authors(&[0, 2])),
            Distance::Finite(0)
        );
        assert_eq!(
            paper_pair_distance(&path, &authors(&[0]), &authors(&[2])),
            Distance::Finite(2)
        );
        let split = CollabNetwork::from_edges(4, &[(0, 1), (2, 3)]);
        assert_eq!(
            paper_pair_distance(&split, &authors(&[0]), &authors(&[3])),
            Distance::Infinite
        );
    }

    fn path_corpus() -> CorpusIndex {
        CorpusIndex::build(vec![
            rec("q1", 2010, &["a", "b"], &[]),
            rec("q2", 2010, &["b", "c"], &[]),
            rec("p1", 2010, &["a"], &[]),
            rec("p2", 2010, &["c"], &["p1"]),
            rec("p3", 2010, &["a", "z"], &["p1"]),
            rec("old", 1990, &["ghost"], &[]),
            rec("p4", 2010, &["c"], &["old"]),
        ])
        .unwrap()
    }

    #[test]
    fn year_distances() {
        let corpus = path_corpus();
        let net = CollabNetwork::build_window(&corpus, 2010, 5).unwrap();
        let records = distances_for_year(&corpus, &net, &DistanceOptions::default());
        let got: Vec<(&str, &str, Distance)> = records
            .iter()
            .map(|r| {
                (
                    corpus.paper_id(r.cited),
                    corpus.paper_id(r.citing),
                    r.distance,
                )
            })
            .collect();
        assert_eq!(
            got,
            [
                ("old", "p4", Distance::Infinite),
                ("p1", "p2", Distance::Finite(2)),
                ("p1", "p3", Distance::Finite(0)),
            ]
        );
    }

    #[test]
    fn depth_cap_marks_unreached_pairs() {
        let corpus = path_corpus();
        let net = CollabNetwork::build_window(&corpus, 2010, 5).unwrap();
        let records = distances_for_year(&corpus, &net, &DistanceOptions { depth_cap: Some(1) });
        let p1_p2 = records
            .iter()
            .find(|r| corpus.paper_id(r.citing) == "p2")
            .unwrap();
        assert_eq!(p1_p2.distance, Distance::AtLeast(2));
        let lcc = net.largest_connected_component();
        assert!(matches!(
            average_citation_distance(&records, &lcc, &corpus, &net),
            Err(Error::DepthCapped(2010))
        ));
    }

    fn record(cited: u32, citing: u32, d: u32) -> CitationDistanceRecord {
        CitationDistanceRecord {
            cited: PaperIdx(cited),
            citing: PaperIdx(citing),
            citing_year: 2010,
            distance: Distance::Finite(d),
        }
    }

    #[test]
    fn average_over_valid_pairs() {
        let corpus = path_corpus();
        let net = CollabNetwork::build_window(&corpus, 2010, 5).unwrap();
        let lcc = net.largest_connected_component();
        let records = distances_for_year(&corpus, &net, &DistanceOptions::default());
        // p1->p2 (2) and p1->p3 (0) are valid; old->p4 is not.
        let ctx = average_citation_distance(&records, &lcc, &corpus, &net).unwrap();
        assert_eq!(ctx.valid_pair_count, 2);
        assert_eq!(ctx.d_bar, 1.0);
        assert_eq!(ctx.lambda * ctx.d_bar, 1.0);
    }

    #[test]
    fn no_valid_pairs_is_an_error() {
        let corpus = path_corpus();
        let net = CollabNetwork::build_window(&corpus, 2010, 5).unwrap();
        let empty = NodeSet::from_members(net.node_count(), []);
        let records = vec![record(0, 1, 3)];
        assert!(matches!(
            average_citation_distance(&records, &empty, &corpus, &net),
            Err(Error::DBarUndefined(2010))
        ));
    }

    #[test]
    fn substitution_uses_nearest_earlier_year() {
        let mut computed = BTreeMap::new();
        computed.insert(2000, Err(Error::DBarUndefined(2000)));
        computed.insert(2001, YearContext::new(2001, 3.0, 10));
        computed.insert(2002, Err(Error::DBarUndefined(2002)));
        computed.insert(2003, YearContext::new(2003, 2.0, 10));
        let (contexts, subs) = YearContexts::resolve(computed);
        assert!(contexts.get(2000).is_err());
        assert_eq!(contexts.get(2002).unwrap().d_bar, 3.0);
        assert_eq!(contexts.get(2002).unwrap().substituted_from, Some(2001));
        assert_eq!(subs.len(), 2);
        assert_eq!(subs[0].source_year, None);
        assert_eq!(subs[1].source_year, Some(2001));
    }

    #[test]
    fn table_groups_by_cited_paper() {
        let table = DistanceTable::new(4, vec![record(2, 3, 1), record(0, 3, 2), record(0, 1, 4)]);
        assert_eq!(table.citations_of(PaperIdx(0)).len(), 2);
        assert_eq!(table.citations_of(PaperIdx(0))[0].citing, PaperIdx(1));
        assert!(table.citations_of(PaperIdx(1)).is_empty());
        assert_eq!(table.citations_of(PaperIdx(2)).len(), 1);
    }
}
