//! Corpus ingestion and indexing.
//!
//! Input is line-delimited JSON, one paper per line:
//!
//! ```text
//! {"id": "p2", "year": 2010, "authors": [{"id": "a1"}], "references": ["p1"]}
//! ```
//!
//! Unknown fields are ignored. Malformed lines are rejected with a reason and
//! never abort the stream.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const MIN_YEAR: i32 = 1900;
pub const MAX_YEAR: i32 = 2100;

/// Dense index of a paper inside a [`CorpusIndex`]. Order follows paper id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PaperIdx(pub u32);

/// Dense index of an author inside a [`CorpusIndex`]. Order follows author id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AuthorIdx(pub u32);

impl PaperIdx {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl AuthorIdx {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaperRecord {
    pub paper_id: String,
    pub year: i32,
    /// Deduplicated, in input order.
    pub author_ids: Vec<String>,
    /// Papers this paper cites. Deduplicated, never contains `paper_id`.
    pub reference_ids: Vec<String>,
}

#[derive(Serialize)]
struct WireAuthor<'a> {
    id: &'a str,
}

#[derive(Serialize)]
struct WireRecord<'a> {
    id: &'a str,
    year: i32,
    authors: Vec<WireAuthor<'a>>,
    references: &'a [String],
}

impl PaperRecord {
    /// Serialize into the ingest wire format (no trailing newline).
    pub fn to_json_line(&self) -> String {
        let wire = WireRecord {
            id: &self.paper_id,
            year: self.year,
            authors: self.author_ids.iter().map(|id| WireAuthor { id }).collect(),
            references: &self.reference_ids,
        };
        serde_json::to_string(&wire).expect("record serialization cannot fail")
    }
}

/// Write records as line-delimited JSON.
pub fn write_records<W: std::io::Write>(
    mut out: W,
    records: &[PaperRecord],
) -> std::io::Result<()> {
    for record in records {
        out.write_all(record.to_json_line().as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RejectReason {
    InvalidUtf8,
    MalformedJson,
    MissingId,
    InvalidId,
    MissingYear,
    InvalidYear,
    YearOutOfRange,
    MissingAuthors,
    InvalidAuthors,
    EmptyAuthors,
    InvalidReferences,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::InvalidUtf8 => "invalid_utf8",
            RejectReason::MalformedJson => "malformed_json",
            RejectReason::MissingId => "missing_id",
            RejectReason::InvalidId => "invalid_id",
            RejectReason::MissingYear => "missing_year",
            RejectReason::InvalidYear => "invalid_year",
            RejectReason::YearOutOfRange => "year_out_of_range",
            RejectReason::MissingAuthors => "missing_authors",
            RejectReason::InvalidAuthors => "invalid_authors",
            RejectReason::EmptyAuthors => "empty_authors",
            RejectReason::InvalidReferences => "invalid_references",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Repairs applied to an accepted record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Warning {
    DuplicateAuthor,
    AuthorWithoutId,
    DuplicateReference,
    InvalidReference,
    SelfReference,
}

impl Warning {
    pub fn as_str(self) -> &'static str {
        match self {
            Warning::DuplicateAuthor => "duplicate_author",
            Warning::AuthorWithoutId => "author_without_id",
            Warning::DuplicateReference => "duplicate_reference",
            Warning::InvalidReference => "invalid_reference",
            Warning::SelfReference => "self_reference",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub lines_read: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub reject_reasons: BTreeMap<String, u64>,
    pub warnings: BTreeMap<String, u64>,
}

#[derive(Deserialize)]
struct RawRecord {
    #[serde(default)]
    id: Option<Value>,
    #[serde(default)]
    year: Option<Value>,
    #[serde(default)]
    authors: Option<Value>,
    #[serde(default)]
    references: Option<Value>,
}

type LineOutcome = std::result::Result<(PaperRecord, Vec<Warning>), RejectReason>;

/// Validate a single input line.
pub fn parse_line(line: &[u8]) -> LineOutcome {
    let text = std::str::from_utf8(line).map_err(|_| RejectReason::InvalidUtf8)?;
    let raw: RawRecord = serde_json::from_str(text).map_err(|_| RejectReason::MalformedJson)?;
    let mut warnings = Vec::new();

    let paper_id = match raw.id {
        None | Some(Value::Null) => return Err(RejectReason::MissingId),
        Some(Value::String(s)) if !s.is_empty() => s,
        Some(_) => return Err(RejectReason::InvalidId),
    };

    let year = match raw.year {
        None | Some(Value::Null) => return Err(RejectReason::MissingYear),
        Some(Value::Number(n)) => n.as_i64().ok_or(RejectReason::InvalidYear)?,
        Some(_) => return Err(RejectReason::InvalidYear),
    };
    if !(i64::from(MIN_YEAR)..=i64::from(MAX_YEAR)).contains(&year) {
        return Err(RejectReason::YearOutOfRange);
    }

    let authors = match raw.authors {
        None | Some(Value::Null) => return Err(RejectReason::MissingAuthors),
        Some(Value::Array(items)) => items,
        Some(_) => return Err(RejectReason::InvalidAuthors),
    };
    let mut author_ids: Vec<String> = Vec::with_capacity(authors.len());
    let mut seen = HashSet::with_capacity(authors.len());
    for author in authors {
        let id = match author {
            Value::Object(mut obj) => match obj.remove("id") {
                Some(Value::String(s)) if !s.is_empty() => s,
                _ => {
                    warnings.push(Warning::AuthorWithoutId);
                    continue;
                }
            },
            _ => {
                warnings.push(Warning::AuthorWithoutId);
                continue;
            }
        };
        if seen.insert(id.clone()) {
            author_ids.push(id);
        } else {
            warnings.push(Warning::DuplicateAuthor);
        }
    }
    if author_ids.is_empty() {
        return Err(RejectReason::EmptyAuthors);
    }

    let references = match raw.references {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => items,
        Some(_) => return Err(RejectReason::InvalidReferences),
    };
    let mut reference_ids = Vec::with_capacity(references.len());
    let mut seen = HashSet::with_capacity(references.len());
    for reference in references {
        let Value::String(id) = reference else {
            warnings.push(Warning::InvalidReference);
            continue;
        };
        if id == paper_id {
            warnings.push(Warning::SelfReference);
        } else if seen.insert(id.clone()) {
            reference_ids.push(id);
        } else {
            warnings.push(Warning::DuplicateReference);
        }
    }

    Ok((
        PaperRecord {
            paper_id,
            year: year as i32,
            author_ids,
            reference_ids,
        },
        warnings,
    ))
}

/// Parse a line-delimited record stream.
///
/// Blank lines are counted in `lines_read` but are neither accepted nor
/// rejected. Only a failure to read the stream itself is an error.
pub fn parse_records<R: BufRead>(mut reader: R) -> Result<(Vec<PaperRecord>, IngestReport)> {
    let mut lines = Vec::new();
    loop {
        let mut buf = Vec::new();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        while matches!(buf.last(), Some(b'\n' | b'\r')) {
            buf.pop();
        }
        lines.push(buf);
    }

    let outcomes: Vec<Option<LineOutcome>> = lines
        .par_iter()
        .map(|line| {
            if line.iter().all(u8::is_ascii_whitespace) {
                None
            } else {
                Some(parse_line(line))
            }
        })
        .collect();

    let mut report = IngestReport {
        lines_read: lines.len() as u64,
        ..IngestReport::default()
    };
    let mut records = Vec::new();
    for outcome in outcomes.into_iter().flatten() {
        match outcome {
            Ok((record, warnings)) => {
                for w in warnings {
                    *report.warnings.entry(w.as_str().to_owned()).or_default() += 1;
                }
                report.accepted += 1;
                records.push(record);
            }
            Err(reason) => {
                report.rejected += 1;
                *report
                    .reject_reasons
                    .entry(reason.as_str().to_owned())
                    .or_default() += 1;
            }
        }
    }
    Ok((records, report))
}

/// One citation edge: `cited` is cited by `citing`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Citation {
    pub cited: PaperIdx,
    pub citing: PaperIdx,
}

/// Immutable, interned view of a validated corpus.
///
/// Papers and authors are assigned dense indices in id order, so index
/// order doubles as the canonical output order everywhere downstream.
#[derive(Debug)]
pub struct CorpusIndex {
    papers: Vec<PaperRecord>,
    paper_lookup: HashMap<String, PaperIdx>,
    authors: Vec<String>,
    author_lookup: HashMap<String, AuthorIdx>,
    paper_authors: Vec<Vec<AuthorIdx>>,
    author_papers: Vec<Vec<PaperIdx>>,
    papers_by_year: BTreeMap<i32, Vec<PaperIdx>>,
    citations_by_year: BTreeMap<i32, Vec<Citation>>,
    dangling_references: u64,
}

impl CorpusIndex {
    /// Index validated records. Citations are keyed by the citing paper's
    /// year; references to papers outside the record set are dropped and
    /// tallied in [`CorpusIndex::dangling_references`].
    pub fn build(mut records: Vec<PaperRecord>) -> Result<Self> {
        records.sort_by(|a, b| a.paper_id.cmp(&b.paper_id));
        if let Some(pair) = records.windows(2).find(|w| w[0].paper_id == w[1].paper_id) {
            return Err(Error::DuplicatePaper(pair[0].paper_id.clone()));
        }

        let paper_lookup: HashMap<String, PaperIdx> = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.paper_id.clone(), PaperIdx(i as u32)))
            .collect();

        let mut authors: Vec<String> = records
            .iter()
            .flat_map(|r| r.author_ids.iter().cloned())
            .collect();
        authors.sort_unstable();
        authors.dedup();
        let author_lookup: HashMap<String, AuthorIdx> = authors
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), AuthorIdx(i as u32)))
            .collect();

        let mut paper_authors = Vec::with_capacity(records.len());
        let mut author_papers = vec![Vec::new(); authors.len()];
        let mut papers_by_year: BTreeMap<i32, Vec<PaperIdx>> = BTreeMap::new();
        for (i, record) in records.iter().enumerate() {
            let pidx = PaperIdx(i as u32);
            let mut list: Vec<AuthorIdx> = Vec::with_capacity(record.author_ids.len());
            for a in &record.author_ids {
                let aidx = author_lookup[a];
                if !list.contains(&aidx) {
                    list.push(aidx);
                    author_papers[aidx.index()].push(pidx);
                }
            }
            paper_authors.push(list);
            papers_by_year.entry(record.year).or_default().push(pidx);
        }

        let mut citations_by_year: BTreeMap<i32, Vec<Citation>> = BTreeMap::new();
        let mut dangling_references = 0u64;
        for (i, record) in records.iter().enumerate() {
            let citing = PaperIdx(i as u32);
            let mut cited_set: Vec<PaperIdx> = Vec::with_capacity(record.reference_ids.len());
            for r in &record.reference_ids {
                match paper_lookup.get(r) {
                    Some(&cited) if cited != citing => cited_set.push(cited),
                    Some(_) => {}
                    None => dangling_references += 1,
                }
            }
            cited_set.sort_unstable();
            cited_set.dedup();
            let bucket = citations_by_year.entry(record.year).or_default();
            bucket.extend(
                cited_set
                    .into_iter()
                    .map(|cited| Citation { cited, citing }),
            );
        }
        for bucket in citations_by_year.values_mut() {
            bucket.sort_unstable();
        }
        citations_by_year.retain(|_, v| !v.is_empty());

        Ok(CorpusIndex {
            papers: records,
            paper_lookup,
            authors,
            author_lookup,
            paper_authors,
            author_papers,
            papers_by_year,
            citations_by_year,
            dangling_references,
        })
    }

    pub fn paper_count(&self) -> usize {
        self.papers.len()
    }

    pub fn author_count(&self) -> usize {
        self.authors.len()
    }

    /// Records in canonical (paper id) order.
    pub fn records(&self) -> &[PaperRecord] {
        &self.papers
    }

    pub fn paper(&self, idx: PaperIdx) -> &PaperRecord {
        &self.papers[idx.index()]
    }

    pub fn paper_id(&self, idx: PaperIdx) -> &str {
        &self.papers[idx.index()].paper_id
    }

    pub fn paper_year(&self, idx: PaperIdx) -> i32 {
        self.papers[idx.index()].year
    }

    pub fn paper_idx(&self, paper_id: &str) -> Option<PaperIdx> {
        self.paper_lookup.get(paper_id).copied()
    }

    pub fn author_id(&self, idx: AuthorIdx) -> &str {
        &self.authors[idx.index()]
    }

    pub fn author_idx(&self, author_id: &str) -> Option<AuthorIdx> {
        self.author_lookup.get(author_id).copied()
    }

    /// All author ids, sorted.
    pub fn author_ids(&self) -> &[String] {
        &self.authors
    }

    pub fn paper_authors(&self, idx: PaperIdx) -> &[AuthorIdx] {
        &self.paper_authors[idx.index()]
    }

    /// Papers of an author in canonical order.
    pub fn author_papers(&self, idx: AuthorIdx) -> &[PaperIdx] {
        &self.author_papers[idx.index()]
    }

    pub fn papers_in_year(&self, year: i32) -> &[PaperIdx] {
        self.papers_by_year.get(&year).map_or(&[], Vec::as_slice)
    }

    /// Citations made by papers published in `year`, sorted by (cited, citing).
    pub fn citations_in_year(&self, year: i32) -> &[Citation] {
        self.citations_by_year.get(&year).map_or(&[], Vec::as_slice)
    }

    /// Years that have at least one citation, ascending.
    pub fn citation_years(&self) -> impl Iterator<Item = i32> + '_ {
        self.citations_by_year.keys().copied()
    }

    pub fn citation_count(&self) -> usize {
        self.citations_by_year.values().map(Vec::len).sum()
    }

    /// Inclusive range of publication years, `None` for an empty corpus.
    pub fn year_range(&self) -> Option<(i32, i32)> {
        let first = *self.papers_by_year.keys().next()?;
        let last = *self.papers_by_year.keys().next_back()?;
        Some((first, last))
    }

    pub fn dangling_references(&self) -> u64 {
        self.dangling_references
    }

    /// Year of the author's first publication.
    pub fn first_publication_year(&self, idx: AuthorIdx) -> Option<i32> {
        self.author_papers(idx)
            .iter()
            .map(|&p| self.paper_year(p))
            .min()
    }

    pub fn shares_author(&self, a: PaperIdx, b: PaperIdx) -> bool {
        let (xs, ys) = (self.paper_authors(a), self.paper_authors(b));
        xs.iter().any(|x| ys.contains(x))
    }
}
