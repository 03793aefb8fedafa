//! Tab-separated tables exchanged between pipeline stages.
//!
//! Every table starts with a header row. Floats that feed later stages
//! (`d_bar`) are written in shortest round-trip form so that a reloaded
//! table reproduces in-memory results bit for bit.

use std::io::{BufRead, Write};

use crate::analysis::cohort::CareerSeries;
use crate::analysis::trajectory::{TrajectoryFeatures, FEATURE_NAMES, SERIES_LEN};
use crate::collabnet::LccStats;
use crate::corpus::CorpusIndex;
use crate::distance::{CitationDistanceRecord, Distance, YearContext, YearContexts};
use crate::error::{Error, Result};
use crate::metrics::ScholarMetrics;

pub const DISTANCE_HEADER: &str = "citing_year\tcited_paper_id\tciting_paper_id\tdistance";
pub const YEAR_CONTEXT_HEADER: &str = "year\td_bar\tvalid_pair_count";
pub const METRICS_HEADER: &str = "author_id\tas_of_year\tnp\ttc\th\tc\tx\tn_inf";
pub const GRAPH_STATS_HEADER: &str =
    "year\tnode_count\tedge_count\tlcc_size\tavg_degree\tavg_shortest_path\tsample_pairs";

fn malformed(table: &str, line: usize, reason: impl Into<String>) -> Error {
    Error::MalformedTable {
        table: table.to_owned(),
        line,
        reason: reason.into(),
    }
}

/// Data rows of a table after checking its header. Yields (line number, fields).
fn rows<R: BufRead>(reader: R, table: &str, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut lines = reader.lines();
    match lines.next().transpose()? {
        Some(h) if h.trim_end_matches('\r') == header => {}
        Some(h) => return Err(malformed(table, 1, format!("unexpected header {h:?}"))),
        None => return Err(malformed(table, 1, "missing header")),
    }
    let width = header.split('\t').count();
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split('\t').map(str::to_owned).collect();
        if fields.len() != width {
            return Err(malformed(
                table,
                i + 2,
                format!("expected {width} fields, got {}", fields.len()),
            ));
        }
        out.push((i + 2, fields));
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(table: &str, line: usize, field: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| malformed(table, line, format!("{field}: {e}")))
}

/// Distance records sorted by (citing_year, cited, citing).
pub fn write_distances<W: Write>(
    corpus: &CorpusIndex,
    records: &[CitationDistanceRecord],
    mut out: W,
) -> std::io::Result<()> {
    let mut sorted: Vec<&CitationDistanceRecord> = records.iter().collect();
    sorted.sort_unstable_by_key(|r| (r.citing_year, r.cited, r.citing));
    writeln!(out, "{DISTANCE_HEADER}")?;
    for r in sorted {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            r.citing_year,
            corpus.paper_id(r.cited),
            corpus.paper_id(r.citing),
            r.distance
        )?;
    }
    out.flush()
}

pub fn read_distances<R: BufRead>(
    corpus: &CorpusIndex,
    reader: R,
) -> Result<Vec<CitationDistanceRecord>> {
    const T: &str = "distances";
    rows(reader, T, DISTANCE_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            let lookup = |id: &str| {
                corpus
                    .paper_idx(id)
                    .ok_or_else(|| malformed(T, line, format!("unknown paper `{id}`")))
            };
            Ok(CitationDistanceRecord {
                citing_year: parse(T, line, "citing_year", &f[0])?,
                cited: lookup(&f[1])?,
                citing: lookup(&f[2])?,
                distance: parse::<Distance>(T, line, "distance", &f[3])?,
            })
        })
        .collect()
}

pub fn write_year_contexts<W: Write>(contexts: &YearContexts, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{YEAR_CONTEXT_HEADER}")?;
    for c in contexts.iter() {
        writeln!(out, "{}\t{}\t{}", c.year, c.d_bar, c.valid_pair_count)?;
    }
    out.flush()
}

pub fn read_year_contexts<R: BufRead>(reader: R) -> Result<YearContexts> {
    const T: &str = "year_context";
    let contexts = rows(reader, T, YEAR_CONTEXT_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            let ctx = YearContext::new(
                parse(T, line, "year", &f[0])?,
                parse(T, line, "d_bar", &f[1])?,
                parse(T, line, "valid_pair_count", &f[2])?,
            )
            .map_err(|e| malformed(T, line, e.to_string()))?;
            Ok(ctx)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(YearContexts::from_contexts(contexts))
}

pub fn write_metrics<W: Write>(metrics: &[ScholarMetrics], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for m in metrics {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{:.6}\t{}",
            m.author_id, m.as_of_year, m.np, m.tc, m.h, m.c, m.x, m.n_inf
        )?;
    }
    out.flush()
}

pub fn read_metrics<R: BufRead>(reader: R) -> Result<Vec<ScholarMetrics>> {
    const T: &str = "metrics";
    rows(reader, T, METRICS_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            Ok(ScholarMetrics {
                author_id: f[0].clone(),
                as_of_year: parse(T, line, "as_of_year", &f[1])?,
                np: parse(T, line, "np", &f[2])?,
                tc: parse(T, line, "tc", &f[3])?,
                h: parse(T, line, "h", &f[4])?,
                c: parse(T, line, "c", &f[5])?,
                x: parse(T, line, "x", &f[6])?,
                n_inf: parse(T, line, "n_inf", &f[7])?,
            })
        })
        .collect()
}

pub fn write_graph_stats<W: Write>(stats: &[LccStats], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{GRAPH_STATS_HEADER}")?;
    for s in stats {
        let path = s
            .avg_shortest_path
            .map_or_else(|| "NA".to_owned(), |p| format!("{p:.6}"));
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.6}\t{}\t{}",
            s.year, s.node_count, s.edge_count, s.lcc_size, s.avg_degree, path, s.sample_pairs
        )?;
    }
    out.flush()
}

fn series_header() -> String {
    let mut h = "author_id\tfirst_year".to_owned();
    for k in 1..=SERIES_LEN {
        h.push_str(&format!("\ty{k}"));
    }
    h
}

fn features_header() -> String {
    std::iter::once("author_id")
        .chain(FEATURE_NAMES)
        .collect::<Vec<_>>()
        .join("\t")
}

/// Career series with values in shortest round-trip form.
pub fn write_series<W: Write>(series: &[CareerSeries], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", series_header())?;
    for s in series {
        write!(out, "{}\t{}", s.author_id, s.first_year)?;
        for v in &s.values {
            write!(out, "\t{v}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

pub fn read_series<R: BufRead>(reader: R) -> Result<Vec<CareerSeries>> {
    const T: &str = "trajectory_series";
    rows(reader, T, &series_header())?
        .into_iter()
        .map(|(line, f)| {
            Ok(CareerSeries {
                author_id: f[0].clone(),
                first_year: parse(T, line, "first_year", &f[1])?,
                values: f[2..]
                    .iter()
                    .map(|v| parse(T, line, "value", v))
                    .collect::<Result<_>>()?,
            })
        })
        .collect()
}

/// Trajectory features, one row per author, in shortest round-trip form.
pub fn write_features<W: Write>(
    rows: &[(String, TrajectoryFeatures)],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "{}", features_header())?;
    for (id, f) in rows {
        write!(out, "{id}")?;
        for v in f.to_vector() {
            write!(out, "\t{v}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

/// Feature rows as (author_id, 11-dimensional vector).
pub fn read_features<R: BufRead>(reader: R) -> Result<Vec<(String, Vec<f64>)>> {
    const T: &str = "trajectory_features";
    rows(reader, T, &features_header())?
        .into_iter()
        .map(|(line, f)| {
            let values = f[1..]
                .iter()
                .map(|v| parse(T, line, "feature", v))
                .collect::<Result<Vec<f64>>>()?;
            Ok((f[0].clone(), values))
        })
        .collect()
}

/// Author ids from a cohort file: one per line; blank lines and `#`
/// comments are skipped. Order is preserved, duplicates removed.
pub fn read_cohort<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let id = line.trim();
        if id.is_empty() || id.starts_with('#') {
            continue;
        }
        if seen.insert(id.to_owned()) {
            out.push(id.to_owned());
        }
    }
    Ok(out)
}

pub fn write_cohort<W: Write>(ids: &[String], mut out: W) -> std::io::Result<()> {
    for id in ids {
        writeln!(out, "{id}")?;
    }
    out.flush()
}
