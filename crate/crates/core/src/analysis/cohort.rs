//! Scholar cohorts: hyperprolific authors, early-career researchers and the
//! early-trajectory clustering cohort.

use rayon::prelude::*;

use crate::corpus::{AuthorIdx, CorpusIndex};
use crate::distance::{DistanceTable, YearContexts};
use crate::error::Result;
use crate::metrics::{metrics_for_author, ScholarMetrics};

use super::trajectory::SERIES_LEN;

pub const HYPERPROLIFIC_PAPERS_PER_YEAR: usize = 72;
pub const ECR_MIN_YEARS: i32 = 5;
pub const ECR_MAX_YEARS: i32 = 10;
pub const TRAJECTORY_MIN_CITATIONS: u64 = 10;

/// Authors with at least `threshold` papers in some calendar year, by id.
pub fn hyperprolific(corpus: &CorpusIndex, threshold: usize) -> Vec<String> {
    (0..corpus.author_count() as u32)
        .map(AuthorIdx)
        .filter(|&a| {
            let mut years: Vec<i32> = corpus
                .author_papers(a)
                .iter()
                .map(|&p| corpus.paper_year(p))
                .collect();
            years.sort_unstable();
            years.chunk_by(|x, y| x == y).any(|g| g.len() >= threshold)
        })
        .map(|a| corpus.author_id(a).to_owned())
        .collect()
}

/// Early-career researchers at `eval_year`: first publication 5 to 10 years
/// earlier and at least one citation. `metrics` must be as of `eval_year`.
pub fn early_career(
    corpus: &CorpusIndex,
    metrics: &[ScholarMetrics],
    eval_year: i32,
) -> Vec<String> {
    metrics
        .iter()
        .filter(|m| m.tc >= 1)
        .filter(|m| {
            corpus
                .author_idx(&m.author_id)
                .and_then(|a| corpus.first_publication_year(a))
                .is_some_and(|first| (ECR_MIN_YEARS..=ECR_MAX_YEARS).contains(&(eval_year - first)))
        })
        .map(|m| m.author_id.clone())
        .collect()
}

/// A scholar's cumulative index over career years 1..=10.
#[derive(Clone, Debug, PartialEq)]
pub struct CareerSeries {
    pub author_id: String,
    pub first_year: i32,
    pub values: Vec<f64>,
}

/// Series of the chosen indicator for every author whose tenth career year
/// lies within the data (`<= last_year`) and who holds at least
/// `min_citations` citations by its end.
pub fn career_series(
    corpus: &CorpusIndex,
    table: &DistanceTable,
    contexts: &YearContexts,
    last_year: i32,
    min_citations: u64,
    indicator: fn(&ScholarMetrics) -> f64,
) -> Result<Vec<CareerSeries>> {
    let rows: Vec<Result<Option<CareerSeries>>> = (0..corpus.author_count() as u32)
        .into_par_iter()
        .map(|a| {
            let author = AuthorIdx(a);
            let Some(first_year) = corpus.first_publication_year(author) else {
                return Ok(None);
            };
            let tenth = first_year + SERIES_LEN as i32 - 1;
            if tenth > last_year {
                return Ok(None);
            }
            let end = metrics_for_author(corpus, table, contexts, author, tenth)?;
            if end.tc < min_citations {
                return Ok(None);
            }
            let values = (first_year..tenth)
                .map(|y| {
                    metrics_for_author(corpus, table, contexts, author, y).map(|m| indicator(&m))
                })
                .chain(std::iter::once(Ok(indicator(&end))))
                .collect::<Result<Vec<f64>>>()?;
            Ok(Some(CareerSeries {
                author_id: end.author_id,
                first_year,
                values,
            }))
        })
        .collect();
    rows.into_iter().filter_map(Result::transpose).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PaperRecord;

    fn rec(id: String, year: i32, authors: &[&str]) -> PaperRecord {
        PaperRecord {
            paper_id: id,
            year,
            author_ids: authors.iter().map(|s| s.to_string()).collect(),
            reference_ids: vec![],
        }
    }

    #[test]
    fn hyperprolific_needs_one_dense_year() {
        let mut records: Vec<PaperRecord> = (0..72)
            .map(|i| rec(format!("hp{i}"), 2010, &["busy"]))
            .collect();
        // 71 in one year plus some elsewhere is not enough.
        records.extend((0..71).map(|i| rec(format!("s{i}"), 2011, &["steady"])));
        records.extend((0..20).map(|i| rec(format!("t{i}"), 2012, &["steady"])));
        let corpus = CorpusIndex::build(records).unwrap();
        assert_eq!(
            hyperprolific(&corpus, HYPERPROLIFIC_PAPERS_PER_YEAR),
            vec!["busy"]
        );
    }

    #[test]
    fn early_career_window() {
        let corpus = CorpusIndex::build(vec![
            rec("a".into(), 2010, &["young"]),
            rec("b".into(), 2000, &["old"]),
            rec("c".into(), 2014, &["fresh"]),
            rec("d".into(), 2012, &["uncited"]),
        ])
        .unwrap();
        let m = |id: &str, tc| ScholarMetrics {
            author_id: id.into(),
            as_of_year: 2018,
            np: 1,
            tc,
            h: 0,
            c: 0,
            x: 0.0,
            n_inf: 0,
        };
        let metrics = [m("fresh", 3), m("old", 3), m("uncited", 0), m("young", 3)];
        assert_eq!(early_career(&corpus, &metrics, 2018), vec!["young"]);
    }
}
