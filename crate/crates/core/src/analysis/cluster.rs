//! k-means with k-means++ seeding, silhouette scores and enrichment ratios.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub const KMEANS_RESTARTS: u64 = 10;
pub const KMEANS_MAX_ITER: usize = 300;

/// Per-dimension z-scores using the population standard deviation.
/// Zero-variance dimensions become all zeros.
pub fn standardize(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let Some(dim) = points.first().map(Vec::len) else {
        return Vec::new();
    };
    let n = points.len() as f64;
    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut sd = vec![0.0; dim];
    for p in points {
        for ((s, v), m) in sd.iter_mut().zip(p).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    sd.iter_mut().for_each(|s| *s = (*s / n).sqrt());
    points
        .iter()
        .map(|p| {
            p.iter()
                .zip(&mean)
                .zip(&sd)
                .map(|((v, m), s)| if *s > 0.0 { (v - m) / s } else { 0.0 })
                .collect()
        })
        .collect()
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeansFit {
    /// Cluster labels ordered by size: 0 is the largest cluster, so with
    /// `k = 2` label 1 marks the smaller one.
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub sizes: Vec<usize>,
    pub inertia: f64,
    /// Restart that produced this fit.
    pub restart: u64,
}

/// Restart index, labels, centroids and inertia of one k-means run.
type Restart = (u64, Vec<usize>, Vec<Vec<f64>>, f64);

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeans_plus_plus<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && *d > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> (Vec<usize>, Vec<Vec<f64>>, f64) {
    let k = centroids.len();
    let dim = points[0].len();
    let mut labels = vec![usize::MAX; points.len()];
    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        for (label, p) in labels.iter_mut().zip(points) {
            let (c, _) = nearest(p, &centroids);
            if *label != c {
                *label = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&l, p) in labels.iter().zip(points) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Re-seed an empty cluster with the point farthest from its
                // centroid.
                let (far, _) = points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i, sq_dist(p, &centroids[labels[i]])))
                    .fold(
                        (0, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
                let old = labels[far];
                counts[old] -= 1;
                for (s, v) in sums[old].iter_mut().zip(&points[far]) {
                    *s -= v;
                }
                labels[far] = c;
                counts[c] = 1;
                sums[c] = points[far].clone();
            }
        }
        for c in 0..k {
            centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
        }
    }
    hartigan(points, &mut labels, &mut centroids);
    let inertia = labels
        .iter()
        .zip(points)
        .map(|(&l, p)| sq_dist(p, &centroids[l]))
        .sum();
    (labels, centroids, inertia)
}

/// Single-point transfers that strictly lower the inertia, applied until
/// none is left. Escapes many Lloyd fixed points that are not local optima
/// of the partition.
fn hartigan(points: &[Vec<f64>], labels: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for _ in 0..KMEANS_MAX_ITER {
        let mut moved = false;
        for (i, p) in points.iter().enumerate() {
            let from = labels[i];
            if counts[from] < 2 {
                continue;
            }
            let nf = counts[from] as f64;
            let removal = nf / (nf - 1.0) * sq_dist(p, &centroids[from]);
            let mut best: Option<(usize, f64)> = None;
            for to in (0..k).filter(|&c| c != from) {
                let nt = counts[to] as f64;
                let gain = removal - nt / (nt + 1.0) * sq_dist(p, &centroids[to]);
                if gain > 1e-12 * removal.max(1e-300) && best.is_none_or(|(_, g)| gain > g) {
                    best = Some((to, gain));
                }
            }
            if let Some((to, _)) = best {
                let nt = counts[to] as f64;
                for (c, v) in centroids[from].iter_mut().zip(p) {
                    *c = (*c * nf - v) / (nf - 1.0);
                }
                for (c, v) in centroids[to].iter_mut().zip(p) {
                    *c = (*c * nt + v) / (nt + 1.0);
                }
                counts[from] -= 1;
                counts[to] += 1;
                labels[i] = to;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    // Recompute centroids exactly from the final partition.
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    for (&l, p) in labels.iter().zip(points) {
        for (s, v) in sums[l].iter_mut().zip(p) {
            *s += v;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
        }
    }
}

/// k-means over already standardized points, best of [`KMEANS_RESTARTS`]
/// k-means++ restarts by (inertia, restart index).
pub fn kmeans_cluster(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansFit> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if points.len() < k {
        return Err(Error::InvalidParameter(format!(
            "{} points cannot form {k} clusters",
            points.len()
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::InvalidParameter("points differ in dimension".into()));
    }

    let runs: Vec<Restart> = (0..KMEANS_RESTARTS)
        .into_par_iter()
        .map(|restart| {
            let mut rng = rng::substream(seed, "kmeans", restart);
            let init = kmeans_plus_plus(points, k, &mut rng);
            let (labels, centroids, inertia) = lloyd(points, init);
            (restart, labels, centroids, inertia)
        })
        .collect();
    let (restart, labels, centroids, inertia) = runs
        .into_iter()
        .min_by(|a, b| a.3.total_cmp(&b.3).then(a.0.cmp(&b.0)))
        .expect("at least one restart");

    let mut sizes = vec![0usize; k];
    for &l in &labels {
        sizes[l] += 1;
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let mut relabel = vec![0usize; k];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new;
    }
    Ok(KMeansFit {
        labels: labels.into_iter().map(|l| relabel[l]).collect(),
        centroids: order.iter().map(|&o| centroids[o].clone()).collect(),
        sizes: order.iter().map(|&o| sizes[o]).collect(),
        inertia,
        restart,
    })
}

/// Mean silhouette with Euclidean distance. Points in singleton clusters
/// score 0.
pub fn silhouette_score(points: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    if points.len() != labels.len() {
        return Err(Error::InvalidParameter(
            "points and labels differ in length".into(),
        ));
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::InvalidParameter(
            "silhouette needs at least two clusters".into(),
        ));
    }
    let scores: Vec<f64> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let own = labels[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for (j, p) in points.iter().enumerate() {
                if j != i {
                    sums[labels[j]] += sq_dist(&points[i], p).sqrt();
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own && sizes[c] > 0)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                (b - a) / denom
            } else {
                0.0
            }
        })
        .collect();
    Ok(scores.iter().sum::<f64>() / points.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub k: usize,
    pub silhouette: f64,
    pub fit: KMeansFit,
}

/// Fit every `k` in `ks` and score it.
pub fn silhouette_sweep(
    points: &[Vec<f64>],
    ks: impl IntoIterator<Item = usize>,
    seed: u64,
) -> Result<Vec<SweepEntry>> {
    ks.into_iter()
        .map(|k| {
            let fit = kmeans_cluster(points, k, seed)?;
            let silhouette = silhouette_score(points, &fit.labels)?;
            Ok(SweepEntry { k, silhouette, fit })
        })
        .collect()
}

/// Per-cluster mean of every dimension, indexed by label.
pub fn cluster_profiles(points: &[Vec<f64>], labels: &[usize]) -> Vec<Vec<f64>> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let dim = points.first().map_or(0, Vec::len);
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(p) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .map(|(s, c)| s.into_iter().map(|v| v / c as f64).collect())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Enrichment {
    pub cluster1_count: usize,
    pub flagged1: usize,
    pub ratio1: f64,
    pub cluster0_count: usize,
    pub flagged0: usize,
    pub ratio0: f64,
    /// `ratio1 / ratio0`; infinite when only cluster 1 holds flagged
    /// members, NaN when neither does.
    pub enrichment: f64,
}

/// Share of flagged members in cluster 1 relative to cluster 0.
pub fn enrichment_ratio(labels: &[usize], flagged: &[bool]) -> Result<Enrichment> {
    if labels.len() != flagged.len() {
        return Err(Error::InvalidParameter(
            "labels and flags differ in length".into(),
        ));
    }
    let mut counts = [0usize; 2];
    let mut hits = [0usize; 2];
    for (&l, &f) in labels.iter().zip(flagged) {
        if l > 1 {
            return Err(Error::InvalidParameter(format!(
                "label {l} outside a two-cluster split"
            )));
        }
        counts[l] += 1;
        hits[l] += usize::from(f);
    }
    for (c, &n) in counts.iter().enumerate() {
        if n == 0 {
            return Err(Error::InvalidParameter(format!("cluster {c} is empty")));
        }
    }
    let ratio1 = hits[1] as f64 / counts[1] as f64;
    let ratio0 = hits[0] as f64 / counts[0] as f64;
    let enrichment = if ratio0 > 0.0 {
        ratio1 / ratio0
    } else if ratio1 > 0.0 {
        f64::INFINITY
    } else {
        f64::NAN
    };
    Ok(Enrichment {
        cluster1_count: counts[1],
        flagged1: hits[1],
        ratio1,
        cluster0_count: counts[0],
        flagged0: hits[0],
        ratio0,
        enrichment,
    })
}
