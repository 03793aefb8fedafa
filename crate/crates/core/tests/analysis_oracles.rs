use std::collections::BTreeMap;

use citedist_core::analysis::{
    kmeans_cluster, mann_whitney_u, rank_scholars, ranking_delta, standardize, trajectory_features,
    wilcoxon_signed_rank, Alternative, PValueMethod,
};
use citedist_core::rng::substream;
use proptest::prelude::*;
use rand::Rng;

fn mean_ranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            let below = values.iter().filter(|&&w| w < v).count() as f64;
            let equal = values.iter().filter(|&&w| w == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Signed-rank p-value by enumerating all 2^n sign assignments.
fn wilcoxon_enumerated(deltas: &[f64], alt: Alternative) -> (f64, f64) {
    let nz: Vec<f64> = deltas.iter().copied().filter(|&d| d != 0.0).collect();
    let ranks = mean_ranks(&nz.iter().map(|d| d.abs()).collect::<Vec<_>>());
    let observed: f64 = nz
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let n = nz.len();
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| ranks[i])
            .sum();
        let hit = match alt {
            Alternative::Less => w <= observed + 1e-9,
            Alternative::Greater => w >= observed - 1e-9,
        };
        hits += u64::from(hit);
    }
    (observed, hits as f64 / (1u64 << n) as f64)
}

#[test]
fn wilcoxon_exact_matches_enumeration() {
    for case in 0..400u64 {
        let mut rng = substream(3, "wilcoxon-oracle", case);
        let n = rng.random_range(1..=12);
        // Small integer range so ties and zeros occur.
        let deltas: Vec<f64> = (0..n)
            .map(|_| f64::from(rng.random_range(-6..=6i32)))
            .collect();
        if deltas.iter().all(|&d| d == 0.0) {
            continue;
        }
        for alt in [Alternative::Less, Alternative::Greater] {
            let got = wilcoxon_signed_rank(&deltas, alt).unwrap();
            let (w, p) = wilcoxon_enumerated(&deltas, alt);
            assert_eq!(got.method, PValueMethod::Exact);
            assert_eq!(got.statistic, w, "{deltas:?}");
            assert!(
                (got.p_value - p).abs() < 1e-12,
                "{deltas:?} {alt}: {} vs {p}",
                got.p_value
            );
            assert_eq!(got.n, deltas.iter().filter(|&&d| d != 0.0).count());
        }
    }
}

#[test]
fn wilcoxon_worked_examples() {
    let r = wilcoxon_signed_rank(&[-1.0, -2.0, -3.0], Alternative::Less).unwrap();
    assert_eq!((r.statistic, r.p_value), (0.0, 0.125));
    let r = wilcoxon_signed_rank(&[1.0, 2.0, 3.0], Alternative::Greater).unwrap();
    assert_eq!((r.statistic, r.p_value), (6.0, 0.125));
    let r = wilcoxon_signed_rank(&[5.0], Alternative::Less).unwrap();
    assert_eq!((r.statistic, r.p_value), (1.0, 1.0));
    assert!(wilcoxon_signed_rank(&[0.0, 0.0], Alternative::Less).is_err());
}

fn combinations(
    n: usize,
    k: usize,
    start: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for i in start..n {
        current.push(i);
        combinations(n, k, i + 1, current, out);
        current.pop();
    }
}

/// U p-value by enumerating every assignment of ranks 1..=n1+n2 to group 1.
fn mann_whitney_enumerated(g1: &[f64], g2: &[f64], alt: Alternative) -> (f64, f64) {
    let n1 = g1.len();
    let n = n1 + g2.len();
    let all: Vec<f64> = g1.iter().chain(g2).copied().collect();
    let ranks = mean_ranks(&all);
    let offset = (n1 * (n1 + 1)) as f64 / 2.0;
    let observed = ranks[..n1].iter().sum::<f64>() - offset;
    let mut subsets = Vec::new();
    combinations(n, n1, 0, &mut Vec::new(), &mut subsets);
    let hits = subsets
        .iter()
        .filter(|s| {
            let u = s.iter().map(|&i| (i + 1) as f64).sum::<f64>() - offset;
            match alt {
                Alternative::Less => u <= observed,
                Alternative::Greater => u >= observed,
            }
        })
        .count();
    (observed, hits as f64 / subsets.len() as f64)
}

#[test]
fn mann_whitney_exact_matches_enumeration() {
    for case in 0..300u64 {
        let mut rng = substream(4, "mwu-oracle", case);
        let n1 = rng.random_range(1..=8);
        let n2 = rng.random_range(1..=8);
        // Distinct values: a shuffled sample without replacement.
        let mut pool: Vec<f64> = (0..40).map(f64::from).collect();
        for i in (1..pool.len()).rev() {
            pool.swap(i, rng.random_range(0..=i));
        }
        let g1 = &pool[..n1];
        let g2 = &pool[n1..n1 + n2];
        for alt in [Alternative::Less, Alternative::Greater] {
            let got = mann_whitney_u(g1, g2, alt).unwrap();
            let (u, p) = mann_whitney_enumerated(g1, g2, alt);
            assert_eq!(got.method, PValueMethod::Exact);
            assert_eq!(got.statistic, u);
            assert!(
                (got.p_value - p).abs() < 1e-12,
                "{g1:?} {g2:?} {alt}: {} vs {p}",
                got.p_value
            );
        }
    }
}

#[test]
fn mann_whitney_worked_examples() {
    let r = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0], Alternative::Less).unwrap();
    assert_eq!(r.statistic, 0.0);
    assert!((r.p_value - 1.0 / 6.0).abs() < 1e-15);
    let r = mann_whitney_u(&[3.0, 4.0], &[1.0, 2.0], Alternative::Less).unwrap();
    assert_eq!((r.statistic, r.p_value), (4.0, 1.0));
    let same = [1.0, 2.0, 3.0, 4.0, 5.0];
    let r = mann_whitney_u(&same, &same, Alternative::Less).unwrap();
    assert!((r.p_value - 0.5).abs() < 0.05, "{}", r.p_value);
}

fn inertia(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    (0..k)
        .map(|c| {
            let members: Vec<&Vec<f64>> = points
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == c)
                .map(|(p, _)| p)
                .collect();
            if members.is_empty() {
                return 0.0;
            }
            let dim = points[0].len();
            let centroid: Vec<f64> = (0..dim)
                .map(|j| members.iter().map(|p| p[j]).sum::<f64>() / members.len() as f64)
                .collect();
            members
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(&centroid)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                })
                .sum()
        })
        .sum()
}

fn best_two_partition(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    // Point 0 fixed in cluster 0; every nonempty complement is a partition.
    (1u32..(1 << (n - 1)))
        .map(|mask| {
            let labels: Vec<usize> = (0..n)
                .map(|i| {
                    if i == 0 {
                        0
                    } else {
                        (mask >> (i - 1) & 1) as usize
                    }
                })
                .collect();
            inertia(points, &labels, 2)
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn kmeans_matches_exhaustive_two_partition() {
    for case in 0..300u64 {
        let mut rng = substream(8, "kmeans-oracle", case);
        let n = rng.random_range(2..=12);
        let dim = rng.random_range(1..=4);
        // Two blobs of unit spread; small separations overlap heavily.
        let sep: f64 = rng.random_range(0.5..6.0);
        let points: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        rng.random_range(-1.0..1.0) + if i % 2 == 0 && j == 0 { sep } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        let best = best_two_partition(&points);
        let fit = kmeans_cluster(&points, 2, case).unwrap();
        assert!(
            (fit.inertia - best).abs() <= 1e-9 * best.max(1.0),
            "case {case}: {} vs {best}",
            fit.inertia
        );
        assert!((inertia(&points, &fit.labels, 2) - fit.inertia).abs() <= 1e-9 * best.max(1.0));
        assert!(fit.sizes[1] <= fit.sizes[0]);
    }
}

#[test]
fn kmeans_rarely_misses_on_structureless_points() {
    // Uniform noise has many near-equal local optima; restarts are a
    // heuristic there, so only the hit rate is checked.
    let cases = 500u64;
    let misses = (0..cases)
        .filter(|&case| {
            let mut rng = substream(8, "kmeans-noise", case);
            let n = rng.random_range(2..=12);
            let dim = rng.random_range(1..=4);
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect())
                .collect();
            let best = best_two_partition(&points);
            let fit = kmeans_cluster(&points, 2, case).unwrap();
            assert!(fit.inertia >= best - 1e-9 * best.max(1.0));
            (fit.inertia - best).abs() > 1e-9 * best.max(1.0)
        })
        .count();
    assert!(misses * 100 <= cases as usize, "{misses} misses in {cases}");
}

fn values_strategy() -> impl Strategy<Value = BTreeMap<String, f64>> {
    prop::collection::btree_map("[a-z]{1,4}", (0u32..20).prop_map(f64::from), 1..60)
}

proptest! {
    #[test]
    fn rank_sums_are_conserved(values in values_strategy()) {
        let n = values.len() as f64;
        let ranks = rank_scholars("m", &values);
        prop_assert_eq!(ranks.ranks.values().sum::<f64>(), n * (n + 1.0) / 2.0);
    }

    #[test]
    fn full_population_deltas_sum_to_zero(values in values_strategy(), seed in 0u64..1000) {
        let mut rng = substream(seed, "other-metric", 0);
        let other: BTreeMap<String, f64> = values.keys().map(|k| (k.clone(), f64::from(rng.random_range(0..10u32)))).collect();
        let everyone: Vec<String> = values.keys().cloned().collect();
        let d = ranking_delta(&rank_scholars("x", &values), &rank_scholars("np", &other), &everyone).unwrap();
        prop_assert_eq!(d.values().sum::<f64>(), 0.0);
    }

    #[test]
    fn ranks_ignore_positive_scaling(values in values_strategy(), k in 1u32..1000) {
        let scaled: BTreeMap<String, f64> = values.iter().map(|(a, v)| (a.clone(), v * f64::from(k) / 7.0)).collect();
        prop_assert_eq!(rank_scholars("m", &values).ranks, rank_scholars("m", &scaled).ranks);
    }

    #[test]
    fn larger_values_never_rank_worse(values in values_strategy()) {
        let ranks = rank_scholars("m", &values);
        for (a, va) in &values {
            for (b, vb) in &values {
                if va > vb {
                    prop_assert!(ranks.get(a).unwrap() < ranks.get(b).unwrap());
                }
            }
        }
    }

    #[test]
    fn trajectory_features_translate(series in prop::collection::vec(0u32..1000, 10), c in 1u32..1000) {
        let base: Vec<f64> = series.iter().map(|&v| f64::from(v)).collect();
        let shifted: Vec<f64> = base.iter().map(|v| v + f64::from(c)).collect();
        let a = trajectory_features(&base).unwrap();
        let b = trajectory_features(&shifted).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs()));
        prop_assert!(close(b.early_mean, a.early_mean + f64::from(c)));
        prop_assert!(close(b.late_mean, a.late_mean + f64::from(c)));
        prop_assert!(close(b.delta_mean, a.delta_mean));
        for (x, y) in [
            (a.early_slope, b.early_slope), (a.late_slope, b.late_slope), (a.delta_slope, b.delta_slope),
            (a.early_std, b.early_std), (a.late_std, b.late_std), (a.delta_std, b.delta_std),
        ] {
            prop_assert!(close(x, y));
        }
        prop_assert_eq!(a.max_increment_year, b.max_increment_year);
    }

    #[test]
    fn standardized_columns_are_centered(rows in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 3), 2..40)) {
        let z = standardize(&rows);
        for j in 0..3 {
            let mean = z.iter().map(|r| r[j]).sum::<f64>() / z.len() as f64;
            prop_assert!(mean.abs() < 1e-9);
        }
    }
}
