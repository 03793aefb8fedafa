//! Yearly sliding-window co-authorship networks.
//!
//! The network for year `t` links two authors when they co-authored at least
//! one paper published in `[t - window + 1, t]`. Edges are unweighted and
//! every author of a paper in the window is a node, solo authors included.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorIdx, CorpusIndex};
use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_WINDOW: u32 = 5;
pub const DEFAULT_EXACT_THRESHOLD: usize = 2_000;

const ABSENT: u32 = u32::MAX;

/// Undirected unit-weight graph in compressed adjacency form.
///
/// Dense node indices follow author id order, so the node numbering of a
/// given author set is identical no matter how the corpus was ordered.
#[derive(Clone, Debug)]
pub struct CollabNetwork {
    year: i32,
    window: u32,
    nodes: Vec<AuthorIdx>,
    node_lookup: Vec<u32>,
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
}

impl CollabNetwork {
    /// Build the network for window `[year - window + 1, year]`.
    ///
    /// A window without papers yields an empty network.
    pub fn build_window(corpus: &CorpusIndex, year: i32, window: u32) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidParameter("window must be >= 1".into()));
        }
        let first = year - (window as i32 - 1);
        let mut present = vec![false; corpus.author_count()];
        let mut edges = Vec::new();
        for y in first..=year {
            for &paper in corpus.papers_in_year(y) {
                let authors = corpus.paper_authors(paper);
                for (i, &a) in authors.iter().enumerate() {
                    present[a.index()] = true;
                    for &b in &authors[i + 1..] {
                        edges.push(if a < b { (a, b) } else { (b, a) });
                    }
                }
            }
        }
        let nodes = present
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(i, _)| AuthorIdx(i as u32))
            .collect();
        Ok(Self::from_parts(
            year,
            window,
            corpus.author_count(),
            nodes,
            edges,
        ))
    }

    /// Graph over authors `0..node_count`, all present, with the given edges.
    /// Self-loops and parallel edges are discarded.
    pub fn from_edges(node_count: usize, edges: &[(u32, u32)]) -> Self {
        let nodes = (0..node_count as u32).map(AuthorIdx).collect();
        let edges = edges
            .iter()
            .filter(|(a, b)| a != b)
            .map(|&(a, b)| (AuthorIdx(a.min(b)), AuthorIdx(a.max(b))))
            .collect();
        Self::from_parts(0, 1, node_count, nodes, edges)
    }

    fn from_parts(
        year: i32,
        window: u32,
        author_count: usize,
        nodes: Vec<AuthorIdx>,
        mut edges: Vec<(AuthorIdx, AuthorIdx)>,
    ) -> Self {
        let mut node_lookup = vec![ABSENT; author_count];
        for (i, a) in nodes.iter().enumerate() {
            node_lookup[a.index()] = i as u32;
        }
        edges.sort_unstable();
        edges.dedup();

        let n = nodes.len();
        let mut degree = vec![0u32; n];
        for &(a, b) in &edges {
            degree[node_lookup[a.index()] as usize] += 1;
            degree[node_lookup[b.index()] as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0u32);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill: Vec<u32> = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; *offsets.last().unwrap() as usize];
        for &(a, b) in &edges {
            let (u, v) = (node_lookup[a.index()], node_lookup[b.index()]);
            neighbors[fill[u as usize] as usize] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize] as usize] = u;
            fill[v as usize] += 1;
        }
        for u in 0..n {
            neighbors[offsets[u] as usize..offsets[u + 1] as usize].sort_unstable();
        }

        CollabNetwork {
            year,
            window,
            nodes,
            node_lookup,
            offsets,
            neighbors,
        }
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn neighbors(&self, node: u32) -> &[u32] {
        let (lo, hi) = (self.offsets[node as usize], self.offsets[node as usize + 1]);
        &self.neighbors[lo as usize..hi as usize]
    }

    pub fn degree(&self, node: u32) -> usize {
        self.neighbors(node).len()
    }

    /// Author behind a dense node index.
    pub fn author(&self, node: u32) -> AuthorIdx {
        self.nodes[node as usize]
    }

    /// Dense node index of an author, `None` if the author is not active in
    /// the window.
    #[inline]
    pub fn node_of(&self, author: AuthorIdx) -> Option<u32> {
        match self.node_lookup.get(author.index()) {
            Some(&n) if n != ABSENT => Some(n),
            _ => None,
        }
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.nodes.len() as u32).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Dump `author_id<TAB>author_id` lines, each edge once with the smaller
    /// id first, sorted lexicographically.
    pub fn write_edge_list<W: Write>(
        &self,
        corpus: &CorpusIndex,
        mut out: W,
    ) -> std::io::Result<()> {
        let mut lines: Vec<String> = self
            .edges()
            .map(|(u, v)| {
                let (a, b) = (
                    corpus.author_id(self.author(u)),
                    corpus.author_id(self.author(v)),
                );
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                format!("{a}\t{b}")
            })
            .collect();
        lines.sort_unstable();
        for line in lines {
            writeln!(out, "{line}")?;
        }
        out.flush()
    }

    /// Maximum-cardinality connected component. Ties go to the component
    /// holding the smallest node index.
    pub fn largest_connected_component(&self) -> NodeSet {
        let n = self.nodes.len();
        let mut dsu = DisjointSet::new(n);
        for (u, v) in self.edges() {
            dsu.union(u as usize, v as usize);
        }
        // Scan in index order: the first root to reach the best size owns the
        // smallest minimum index among the tied components.
        let mut best: Option<(usize, usize)> = None;
        let mut seen = vec![false; n];
        for i in 0..n {
            let root = dsu.find(i);
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let size = dsu.size(root);
            if best.is_none_or(|(_, s)| size > s) {
                best = Some((root, size));
            }
        }
        let mut mask = vec![false; n];
        let mut members = Vec::new();
        if let Some((root, _)) = best {
            for (i, m) in mask.iter_mut().enumerate() {
                if dsu.find(i) == root {
                    *m = true;
                    members.push(i as u32);
                }
            }
        }
        NodeSet { members, mask }
    }
}

/// Union by size with path halving.
struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }

    fn size(&self, root: usize) -> usize {
        self.size[root]
    }
}

/// A set of dense node indices with O(1) membership.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeSet {
    members: Vec<u32>,
    mask: Vec<bool>,
}

impl NodeSet {
    pub fn from_members(node_count: usize, members: impl IntoIterator<Item = u32>) -> Self {
        let mut mask = vec![false; node_count];
        for m in members {
            mask[m as usize] = true;
        }
        let members = (0..node_count as u32)
            .filter(|&i| mask[i as usize])
            .collect();
        NodeSet { members, mask }
    }

    #[inline]
    pub fn contains(&self, node: u32) -> bool {
        self.mask.get(node as usize).copied().unwrap_or(false)
    }

    /// Members in ascending order.
    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Reusable breadth-first search state. Resetting is O(1) via epochs.
pub(crate) struct BfsScratch {
    dist: Vec<u32>,
    stamp: Vec<u32>,
    epoch: u32,
    queue: Vec<u32>,
}

impl BfsScratch {
    pub(crate) fn new(node_count: usize) -> Self {
        BfsScratch {
            dist: vec![0; node_count],
            stamp: vec![0; node_count],
            epoch: 0,
            queue: Vec::with_capacity(node_count),
        }
    }

    fn reset(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.queue.clear();
    }

    #[inline]
    pub(crate) fn dist(&self, node: u32) -> Option<u32> {
        (self.stamp[node as usize] == self.epoch).then(|| self.dist[node as usize])
    }

    /// Multi-source BFS. `visit(node, dist)` is called once per reached node
    /// in nondecreasing distance order; returning `true` stops the search.
    /// Nodes beyond `depth_cap` are not expanded.
    pub(crate) fn run<F>(
        &mut self,
        net: &CollabNetwork,
        sources: impl IntoIterator<Item = u32>,
        depth_cap: Option<u32>,
        mut visit: F,
    ) where
        F: FnMut(u32, u32) -> bool,
    {
        self.reset();
        let epoch = self.epoch;
        for s in sources {
            if self.stamp[s as usize] != epoch {
                self.stamp[s as usize] = epoch;
                self.dist[s as usize] = 0;
                self.queue.push(s);
            }
        }
        let mut head = 0;
        // Sources are all visited before expansion so that a stop request
        // from any of them is honored.
        for i in 0..self.queue.len() {
            if visit(self.queue[i], 0) {
                return;
            }
        }
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            let du = self.dist[u as usize];
            if depth_cap.is_some_and(|cap| du >= cap) {
                continue;
            }
            for &v in net.neighbors(u) {
                if self.stamp[v as usize] != epoch {
                    self.stamp[v as usize] = epoch;
                    self.dist[v as usize] = du + 1;
                    self.queue.push(v);
                    if visit(v, du + 1) {
                        return;
                    }
                }
            }
        }
    }
}

/// Reusable buffers for point-to-point bidirectional BFS.
pub(crate) struct PairScratch {
    dist: [Vec<u32>; 2],
    stamp: [Vec<u32>; 2],
    epoch: u32,
    frontier: [Vec<u32>; 2],
    next: Vec<u32>,
}

impl PairScratch {
    pub(crate) fn new(node_count: usize) -> Self {
        PairScratch {
            dist: [vec![0; node_count], vec![0; node_count]],
            stamp: [vec![0; node_count], vec![0; node_count]],
            epoch: 0,
            frontier: [Vec::new(), Vec::new()],
            next: Vec::new(),
        }
    }

    /// Shortest path length between `a` and `b`, `None` if disconnected.
    pub(crate) fn distance(&mut self, net: &CollabNetwork, a: u32, b: u32) -> Option<u32> {
        if a == b {
            return Some(0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp
                .iter_mut()
                .for_each(|s| s.iter_mut().for_each(|x| *x = 0));
            self.epoch = 1;
        }
        let epoch = self.epoch;
        for (side, start) in [a, b].into_iter().enumerate() {
            self.stamp[side][start as usize] = epoch;
            self.dist[side][start as usize] = 0;
            self.frontier[side].clear();
            self.frontier[side].push(start);
        }
        loop {
            if self.frontier[0].is_empty() || self.frontier[1].is_empty() {
                return None;
            }
            // Expand one full level of the smaller frontier.
            let side = usize::from(self.frontier[1].len() < self.frontier[0].len());
            let other = 1 - side;
            let mut best: Option<u32> = None;
            self.next.clear();
            for i in 0..self.frontier[side].len() {
                let u = self.frontier[side][i];
                let du = self.dist[side][u as usize];
                for &v in net.neighbors(u) {
                    if self.stamp[other][v as usize] == epoch {
                        let total = du + 1 + self.dist[other][v as usize];
                        best = Some(best.map_or(total, |b| b.min(total)));
                    }
                    if self.stamp[side][v as usize] != epoch {
                        self.stamp[side][v as usize] = epoch;
                        self.dist[side][v as usize] = du + 1;
                        self.next.push(v);
                    }
                }
            }
            if best.is_some() {
                return best;
            }
            std::mem::swap(&mut self.frontier[side], &mut self.next);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsOptions {
    /// Pairs to sample for the average path length; 0 forces exact mode.
    pub sample_pairs: u64,
    pub seed: u64,
    /// LCC sizes up to this value are always computed exactly.
    pub exact_threshold: usize,
}

impl Default for StatsOptions {
    fn default() -> Self {
        StatsOptions {
            sample_pairs: 10_000,
            seed: 0,
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LccStats {
    pub year: i32,
    pub node_count: usize,
    pub edge_count: usize,
    pub lcc: NodeSet,
    pub lcc_size: usize,
    /// 2 * |edges within LCC| / lcc_size.
    pub avg_degree: f64,
    /// `None` when the LCC has fewer than two nodes.
    pub avg_shortest_path: Option<f64>,
    /// Number of sampled pairs, 0 when exact.
    pub sample_pairs: u64,
}

/// Structural statistics of the network's largest connected component.
///
/// Runs on the ambient rayon pool; sums are integer so the result does not
/// depend on the number of workers.
pub fn graph_stats(net: &CollabNetwork, opts: &StatsOptions) -> LccStats {
    let lcc = net.largest_connected_component();
    let n = lcc.len();
    let degree_sum: u64 = lcc.members().iter().map(|&u| net.degree(u) as u64).sum();
    let avg_degree = if n == 0 {
        0.0
    } else {
        degree_sum as f64 / n as f64
    };

    let (avg_shortest_path, sample_pairs) = if n < 2 {
        (None, 0)
    } else if opts.sample_pairs == 0 || n <= opts.exact_threshold {
        let total: u64 = lcc
            .members()
            .par_iter()
            .map_init(
                || BfsScratch::new(net.node_count()),
                |scratch, &src| {
                    let mut sum = 0u64;
                    scratch.run(net, [src], None, |_, d| {
                        sum += u64::from(d);
                        false
                    });
                    sum
                },
            )
            .sum();
        let ordered_pairs = (n as u64) * (n as u64 - 1);
        (Some(total as f64 / ordered_pairs as f64), 0)
    } else {
        let mut rng = rng::substream(opts.seed, "graph-stats-pairs", net.year() as u64);
        let members = lcc.members();
        let pairs: Vec<(u32, u32)> = (0..opts.sample_pairs)
            .map(|_| loop {
                let a = members[rng.random_range(0..n)];
                let b = members[rng.random_range(0..n)];
                if a != b {
                    break (a, b);
                }
            })
            .collect();
        let total: u64 = pairs
            .par_iter()
            .map_init(
                || PairScratch::new(net.node_count()),
                |scratch, &(a, b)| {
                    u64::from(scratch.distance(net, a, b).expect("LCC is connected"))
                },
            )
            .sum();
        (
            Some(total as f64 / opts.sample_pairs as f64),
            opts.sample_pairs,
        )
    };

    LccStats {
        year: net.year(),
        node_count: net.node_count(),
        edge_count: net.edge_count(),
        lcc_size: n,
        lcc,
        avg_degree,
        avg_shortest_path,
        sample_pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PaperRecord;

    fn rec(id: &str, year: i32, authors: &[&str]) -> PaperRecord {
        PaperRecord {
            paper_id: id.into(),
            year,
            author_ids: authors.iter().map(|s| s.to_string()).collect(),
            reference_ids: vec![],
        }
    }

    fn edge_names(corpus: &CorpusIndex, net: &CollabNetwork) -> Vec<(String, String)> {
        net.edges()
            .map(|(u, v)| {
                (
                    corpus.author_id(net.author(u)).to_string(),
                    corpus.author_id(net.author(v)).to_string(),
                )
            })
            .collect()
    }

    fn pair(a: &str, b: &str) -> (String, String) {
        (a.into(), b.into())
    }

    #[test]
    fn window_includes_both_ends() {
        let corpus = CorpusIndex::build(vec![
            rec("p1", 2000, &["a", "b"]),
            rec("p2", 2004, &["b", "c"]),
        ])
        .unwrap();
        let net = CollabNetwork::build_window(&corpus, 2004, 5).unwrap();
        assert_eq!(
            edge_names(&corpus, &net),
            vec![pair("a", "b"), pair("b", "c")]
        );

        let net = CollabNetwork::build_window(&corpus, 2005, 5).unwrap();
        assert_eq!(edge_names(&corpus, &net), vec![pair("b", "c")]);
        assert!(net.node_of(corpus.author_idx("a").unwrap()).is_none());
    }

    #[test]
    fn solo_author_is_isolated_node() {
        let corpus = CorpusIndex::build(vec![rec("p1", 2004, &["d"])]).unwrap();
        let net = CollabNetwork::build_window(&corpus, 2004, 5).unwrap();
        assert_eq!(net.node_count(), 1);
        assert_eq!(net.edge_count(), 0);
    }

    #[test]
    fn empty_window_is_empty_network() {
        let corpus = CorpusIndex::build(vec![rec("p1", 2004, &["d"])]).unwrap();
        let net = CollabNetwork::build_window(&corpus, 1990, 5).unwrap();
        assert!(net.is_empty());
        assert!(net.largest_connected_component().is_empty());
        assert!(CollabNetwork::build_window(&corpus, 2004, 0).is_err());
    }

    #[test]
    fn repeated_coauthorship_is_one_edge() {
        let corpus = CorpusIndex::build(vec![
            rec("p1", 2001, &["a", "b"]),
            rec("p2", 2002, &["b", "a"]),
        ])
        .unwrap();
        let net = CollabNetwork::build_window(&corpus, 2002, 5).unwrap();
        assert_eq!(net.edge_count(), 1);
    }

    #[test]
    fn edge_list_dump_is_sorted_tsv() {
        let corpus = CorpusIndex::build(vec![
            rec("p1", 2001, &["zed", "amy"]),
            rec("p2", 2002, &["bob", "amy"]),
        ])
        .unwrap();
        let net = CollabNetwork::build_window(&corpus, 2002, 5).unwrap();
        let mut out = Vec::new();
        net.write_edge_list(&corpus, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "amy\tbob\namy\tzed\n");
    }

    #[test]
    fn lcc_picks_largest() {
        let net = CollabNetwork::from_edges(5, &[(0, 1), (2, 3), (3, 4)]);
        assert_eq!(net.largest_connected_component().members(), &[2, 3, 4]);
    }

    #[test]
    fn lcc_of_complete_graph_is_everything() {
        let edges: Vec<_> = (0..5u32)
            .flat_map(|a| (a + 1..5).map(move |b| (a, b)))
            .collect();
        let net = CollabNetwork::from_edges(5, &edges);
        assert_eq!(net.largest_connected_component().len(), 5);
    }

    #[test]
    fn lcc_tie_goes_to_smallest_index() {
        let net = CollabNetwork::from_edges(4, &[(2, 3), (0, 1)]);
        assert_eq!(net.largest_connected_component().members(), &[0, 1]);
    }

    fn exact(net: &CollabNetwork) -> LccStats {
        graph_stats(
            net,
            &StatsOptions {
                sample_pairs: 0,
                ..StatsOptions::default()
            },
        )
    }

    #[test]
    fn path_graph_stats() {
        let stats = exact(&CollabNetwork::from_edges(3, &[(0, 1), (1, 2)]));
        assert_eq!(stats.avg_degree, 4.0 / 3.0);
        assert_eq!(stats.avg_shortest_path, Some(4.0 / 3.0));
        assert_eq!(stats.sample_pairs, 0);
    }

    #[test]
    fn single_edge_stats() {
        let stats = exact(&CollabNetwork::from_edges(2, &[(0, 1)]));
        assert_eq!(stats.avg_degree, 1.0);
        assert_eq!(stats.avg_shortest_path, Some(1.0));
    }

    #[test]
    fn star_stats() {
        let stats = exact(&CollabNetwork::from_edges(
            5,
            &[(0, 1), (0, 2), (0, 3), (0, 4)],
        ));
        assert_eq!(stats.avg_degree, 8.0 / 5.0);
        assert!((stats.avg_shortest_path.unwrap() - 1.6).abs() < 1e-12);
    }

    #[test]
    fn tiny_lcc_has_no_path_length() {
        let stats = exact(&CollabNetwork::from_edges(3, &[]));
        assert_eq!(stats.lcc_size, 1);
        assert_eq!(stats.avg_shortest_path, None);
    }
}
