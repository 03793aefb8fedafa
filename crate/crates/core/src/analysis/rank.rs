use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Fractional ranks of scholars under one metric. Rank 1 is the highest
/// value; tied values share the mean of the ranks they span.
#[derive(Clone, Debug, PartialEq)]
pub struct RankTable {
    pub metric_name: String,
    pub ranks: BTreeMap<String, f64>,
}

impl RankTable {
    pub fn get(&self, author_id: &str) -> Option<f64> {
        self.ranks.get(author_id).copied()
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

/// Mean ranks of `values` sorted ascending, returned in input order.
/// Shared by the rank-based tests.
pub(crate) fn mean_ranks_ascending(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // Positions i..j hold ranks i+1..=j.
        let mean = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = mean;
        }
        i = j;
    }
    ranks
}

pub fn rank_scholars(metric_name: &str, values: &BTreeMap<String, f64>) -> RankTable {
    let negated: Vec<f64> = values.values().map(|v| -v).collect();
    let ranks = mean_ranks_ascending(&negated);
    RankTable {
        metric_name: metric_name.to_owned(),
        ranks: values.keys().cloned().zip(ranks).collect(),
    }
}

/// `rank_x - rank_baseline` per cohort member; negative means the scholar
/// ranks better under `rank_x`.
pub fn ranking_delta(
    rank_x: &RankTable,
    rank_baseline: &RankTable,
    cohort: &[String],
) -> Result<BTreeMap<String, f64>> {
    cohort
        .iter()
        .map(|author| {
            let lookup = |table: &RankTable| {
                table.get(author).ok_or_else(|| Error::MissingFromRanking {
                    author: author.clone(),
                    metric: table.metric_name.clone(),
                })
            };
            Ok((author.clone(), lookup(rank_x)? - lookup(rank_baseline)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|&(k, v)| (k.to_owned(), v)).collect()
    }

    #[test]
    fn ties_share_mean_rank() {
        let t = rank_scholars("x", &values(&[("a", 10.0), ("b", 10.0), ("c", 5.0)]));
        assert_eq!(t.get("a"), Some(1.5));
        assert_eq!(t.get("b"), Some(1.5));
        assert_eq!(t.get("c"), Some(3.0));
    }

    #[test]
    fn single_and_descending() {
        assert_eq!(
            rank_scholars("x", &values(&[("a", 7.0)])).get("a"),
            Some(1.0)
        );
        let t = rank_scholars("x", &values(&[("a", 1.0), ("b", 2.0), ("c", 3.0)]));
        assert_eq!(
            (t.get("c"), t.get("b"), t.get("a")),
            (Some(1.0), Some(2.0), Some(3.0))
        );
    }

    #[test]
    fn delta_sign_convention() {
        let mut x = RankTable {
            metric_name: "x".into(),
            ranks: BTreeMap::new(),
        };
        let mut base = RankTable {
            metric_name: "np".into(),
            ranks: BTreeMap::new(),
        };
        x.ranks.insert("a".into(), 5.0);
        base.ranks.insert("a".into(), 20.0);
        let d = ranking_delta(&x, &base, &["a".to_owned()]).unwrap();
        assert_eq!(d["a"], -15.0);

        let same = ranking_delta(&x, &x, &["a".to_owned()]).unwrap();
        assert_eq!(same["a"], 0.0);

        let err = ranking_delta(&x, &base, &["zz".to_owned()]).unwrap_err();
        assert!(matches!(err, Error::MissingFromRanking { .. }));
    }

    #[test]
    fn full_population_deltas_sum_to_zero() {
        let xs = values(&[("a", 3.0), ("b", 1.0), ("c", 1.0), ("d", 9.0)]);
        let np = values(&[("a", 10.0), ("b", 20.0), ("c", 5.0), ("d", 5.0)]);
        let all: Vec<String> = xs.keys().cloned().collect();
        let d = ranking_delta(&rank_scholars("x", &xs), &rank_scholars("np", &np), &all).unwrap();
        assert_eq!(d.values().sum::<f64>(), 0.0);
    }
}
