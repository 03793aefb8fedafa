//! One-sided Wilcoxon signed-rank and Mann-Whitney U tests.
//!
//! Small samples get exact p-values by counting the null distribution of the
//! statistic; ties are handled by working on doubled mean ranks, which are
//! integers. Larger samples use the tie-corrected normal approximation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::rank::mean_ranks_ascending;
use crate::error::{Error, Result};

/// Largest sample for which the signed-rank p-value is exact.
pub const WILCOXON_EXACT_MAX_N: usize = 25;
/// Largest `n1 * n2` for which the rank-sum p-value is exact (tie-free only).
pub const MANN_WHITNEY_EXACT_MAX_PRODUCT: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alternative {
    Less,
    Greater,
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alternative::Less => "less",
            Alternative::Greater => "greater",
        })
    }
}

impl FromStr for Alternative {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "less" => Ok(Alternative::Less),
            "greater" => Ok(Alternative::Greater),
            other => Err(format!(
                "unknown alternative `{other}` (expected less|greater)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PValueMethod {
    Exact,
    Normal,
}

impl fmt::Display for PValueMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PValueMethod::Exact => "exact",
            PValueMethod::Normal => "normal",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Effective sample size (after dropping zeros for signed-rank).
    pub n: usize,
    pub alternative: Alternative,
    pub method: PValueMethod,
}

fn std_normal_cdf(z: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").cdf(z)
}

fn tail_sum(counts: &[f64], observed: usize, alternative: Alternative) -> f64 {
    let total: f64 = counts.iter().sum();
    let tail: f64 = match alternative {
        Alternative::Less => counts[..=observed.min(counts.len() - 1)].iter().sum(),
        Alternative::Greater => counts.get(observed..).map_or(0.0, |c| c.iter().sum()),
    };
    (tail / total).clamp(0.0, 1.0)
}

fn tie_groups(sorted_or_not: &[f64]) -> Vec<usize> {
    let mut v = sorted_or_not.to_vec();
    v.sort_by(f64::total_cmp);
    v.chunk_by(|a, b| a == b).map(<[f64]>::len).collect()
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(
            "sample contains non-finite values".into(),
        ))
    }
}

/// One-sided signed-rank test on paired differences.
///
/// Zero differences are dropped. The statistic is `W+`, the rank sum of the
/// positive differences. `Less` tests whether differences tend to be
/// negative: `p = P(W+ <= observed)`.
pub fn wilcoxon_signed_rank(deltas: &[f64], alternative: Alternative) -> Result<TestResult> {
    check_finite(deltas)?;
    let nonzero: Vec<f64> = deltas.iter().copied().filter(|&d| d != 0.0).collect();
    if nonzero.is_empty() {
        return Err(Error::DegenerateSample("all differences are zero".into()));
    }
    let n = nonzero.len();
    let abs: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let ranks = mean_ranks_ascending(&abs);
    let w_plus: f64 = nonzero
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .fold(0.0, |acc, (_, r)| acc + r);

    if n <= WILCOXON_EXACT_MAX_N {
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let max: usize = doubled.iter().sum();
        let mut counts = vec![0.0f64; max + 1];
        counts[0] = 1.0;
        for &r in &doubled {
            for s in (r..=max).rev() {
                counts[s] += counts[s - r];
            }
        }
        let observed = (2.0 * w_plus).round() as usize;
        return Ok(TestResult {
            statistic: w_plus,
            p_value: tail_sum(&counts, observed, alternative),
            n,
            alternative,
            method: PValueMethod::Exact,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = tie_groups(&abs)
        .into_iter()
        .map(|t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum::<f64>()
        / 48.0;
    let sd = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term).sqrt();
    let p_value = match alternative {
        Alternative::Less => std_normal_cdf((w_plus - mean + 0.5) / sd),
        Alternative::Greater => std_normal_cdf(-(w_plus - mean - 0.5) / sd),
    };
    Ok(TestResult {
        statistic: w_plus,
        p_value: p_value.clamp(0.0, 1.0),
        n,
        alternative,
        method: PValueMethod::Normal,
    })
}

/// Null distribution of `U` for tie-free samples: `counts[u]` is the number
/// of orderings of `n1 + n2` distinct values that give `U = u`.
fn mann_whitney_null(n1: usize, n2: usize) -> Vec<f64> {
    // dist[j] holds the distribution for (m, j) while sweeping m = 0..=n1.
    let mut dist: Vec<Vec<f64>> = vec![vec![1.0]; n2 + 1];
    for m in 1..=n1 {
        let prev = std::mem::take(&mut dist);
        let mut cur: Vec<Vec<f64>> = Vec::with_capacity(n2 + 1);
        cur.push(vec![1.0]);
        for j in 1..=n2 {
            let mut v = vec![0.0; m * j + 1];
            // Largest value from group 1: it exceeds all j values of group 2.
            for (u, c) in prev[j].iter().enumerate() {
                v[u + j] += c;
            }
            // Largest value from group 2.
            for (u, c) in cur[j - 1].iter().enumerate() {
                v[u] += c;
            }
            cur.push(v);
        }
        dist = cur;
    }
    dist.pop().unwrap()
}

/// One-sided rank-sum test. The statistic is `U` for `group1`, the number of
/// (group1, group2) pairs where the group1 value is larger (ties count one
/// half). `Less` tests whether group1 tends to be smaller.
pub fn mann_whitney_u(
    group1: &[f64],
    group2: &[f64],
    alternative: Alternative,
) -> Result<TestResult> {
    if group1.is_empty() || group2.is_empty() {
        return Err(Error::InvalidParameter(
            "both groups must be nonempty".into(),
        ));
    }
    check_finite(group1)?;
    check_finite(group2)?;
    let (n1, n2) = (group1.len(), group2.len());
    let combined: Vec<f64> = group1.iter().chain(group2).copied().collect();
    let ranks = mean_ranks_ascending(&combined);
    let r1: f64 = ranks[..n1].iter().sum();
    let u = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let ties = tie_groups(&combined);
    let has_ties = ties.iter().any(|&t| t > 1);

    if !has_ties && n1 * n2 <= MANN_WHITNEY_EXACT_MAX_PRODUCT {
        let counts = mann_whitney_null(n1, n2);
        return Ok(TestResult {
            statistic: u,
            p_value: tail_sum(&counts, u.round() as usize, alternative),
            n: n1 + n2,
            alternative,
            method: PValueMethod::Exact,
        });
    }

    let (f1, f2) = (n1 as f64, n2 as f64);
    let big_n = f1 + f2;
    let mean = f1 * f2 / 2.0;
    let tie_sum: f64 = ties
        .into_iter()
        .map(|t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let var = f1 * f2 / 12.0 * ((big_n + 1.0) - tie_sum / (big_n * (big_n - 1.0)));
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let z = (u - mean) / var.sqrt();
        match alternative {
            Alternative::Less => std_normal_cdf(z),
            Alternative::Greater => std_normal_cdf(-z),
        }
    };
    Ok(TestResult {
        statistic: u,
        p_value: p_value.clamp(0.0, 1.0),
        n: n1 + n2,
        alternative,
        method: PValueMethod::Normal,
    })
}
