use std::collections::BTreeSet;

use citedist_core::corpus::{parse_records, write_records, CorpusIndex, PaperRecord};
use citedist_core::distance::{compute_all_years, DistanceOptions};
use citedist_core::synth::{generate_corpus, SynthConfig};
use citedist_core::Distance;
use proptest::prelude::*;

fn records_strategy() -> impl Strategy<Value = Vec<PaperRecord>> {
    prop::collection::vec(
        (
            1990i32..2010,
            prop::collection::btree_set("[a-e][0-9]", 1..4),
            prop::collection::btree_set(0usize..40, 0..6),
        ),
        1..40,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (year, authors, refs))| PaperRecord {
                paper_id: format!("p{i}"),
                year,
                author_ids: authors.into_iter().collect(),
                // Indices past the corpus size dangle on purpose.
                reference_ids: refs
                    .into_iter()
                    .filter(|&r| r != i)
                    .map(|r| format!("p{r}"))
                    .collect(),
            })
            .collect()
    })
}

fn citation_multiset(corpus: &CorpusIndex) -> Vec<(String, String, i32)> {
    let mut out: Vec<_> = corpus
        .citation_years()
        .flat_map(|y| {
            corpus.citations_in_year(y).iter().map(move |c| {
                (
                    corpus.paper_id(c.cited).to_owned(),
                    corpus.paper_id(c.citing).to_owned(),
                    y,
                )
            })
        })
        .collect();
    out.sort();
    out
}

proptest! {
    #[test]
    fn serialize_parse_index_round_trip(records in records_strategy()) {
        let direct = CorpusIndex::build(records.clone()).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        let (parsed, report) = parse_records(buf.as_slice()).unwrap();
        prop_assert_eq!(report.rejected, 0);
        prop_assert_eq!(&parsed, &records);
        let rebuilt = CorpusIndex::build(parsed).unwrap();
        prop_assert_eq!(citation_multiset(&direct), citation_multiset(&rebuilt));
    }

    #[test]
    fn citations_are_conserved(records in records_strategy()) {
        let ids: BTreeSet<&str> = records.iter().map(|r| r.paper_id.as_str()).collect();
        let valid: usize = records
            .iter()
            .map(|r| r.reference_ids.iter().filter(|id| ids.contains(id.as_str())).count())
            .sum();
        let total: usize = records.iter().map(|r| r.reference_ids.len()).sum();
        let corpus = CorpusIndex::build(records.clone()).unwrap();
        prop_assert_eq!(corpus.citation_count(), valid);
        prop_assert_eq!(corpus.dangling_references() as usize, total - valid);
        for c in citation_multiset(&corpus) {
            let citing = corpus.paper(corpus.paper_idx(&c.1).unwrap());
            prop_assert_eq!(citing.year, c.2);
        }
    }

    #[test]
    fn author_papers_inverts_author_lists(records in records_strategy()) {
        let corpus = CorpusIndex::build(records.clone()).unwrap();
        for (a, id) in corpus.author_ids().iter().enumerate() {
            let expected: BTreeSet<&str> = records
                .iter()
                .filter(|r| r.author_ids.contains(id))
                .map(|r| r.paper_id.as_str())
                .collect();
            let got: BTreeSet<&str> = corpus
                .author_papers(citedist_core::AuthorIdx(a as u32))
                .iter()
                .map(|&p| corpus.paper_id(p))
                .collect();
            prop_assert_eq!(got, expected);
        }
    }
}

fn small_config(seed: u64) -> SynthConfig {
    SynthConfig {
        seed,
        last_year: 2006,
        n_background_authors: 400,
        background_papers_per_year: 150,
        ..SynthConfig::default()
    }
}

#[test]
fn generated_corpora_ingest_cleanly() {
    for seed in 0..3 {
        let corpus = generate_corpus(&small_config(seed)).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &corpus.records).unwrap();
        let (parsed, report) = parse_records(buf.as_slice()).unwrap();
        assert_eq!(report.rejected, 0);
        assert!(report.warnings.is_empty(), "{:?}", report.warnings);
        let index = CorpusIndex::build(parsed).unwrap();
        assert_eq!(index.dangling_references(), 0);
    }
}

#[test]
fn high_reach_citations_travel_farther_than_average() {
    let cfg = small_config(42);
    let synth = generate_corpus(&cfg).unwrap();
    let corpus = CorpusIndex::build(synth.records).unwrap();
    let all = compute_all_years(&corpus, 5, &DistanceOptions::default()).unwrap();
    let overall: f64 =
        all.contexts.iter().map(|c| c.d_bar).sum::<f64>() / all.contexts.len() as f64;
    for ta in &synth.ta_authors {
        let a = corpus.author_idx(ta).unwrap();
        let finite: Vec<f64> = corpus
            .author_papers(a)
            .iter()
            .flat_map(|&p| all.table.citations_of(p))
            .filter_map(|r| match r.distance {
                Distance::Finite(d) => Some(f64::from(d)),
                _ => None,
            })
            .collect();
        assert!(!finite.is_empty());
        let mean = finite.iter().sum::<f64>() / finite.len() as f64;
        assert!(mean > overall, "{ta}: {mean} vs d_bar {overall}");
    }
}
