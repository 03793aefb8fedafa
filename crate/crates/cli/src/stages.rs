use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use anyhow::{bail, Context, Result};
use citedist_core::analysis::cluster::{cluster_profiles, silhouette_sweep, SweepEntry};
use citedist_core::analysis::cohort::{
    career_series, early_career, hyperprolific, CareerSeries, HYPERPROLIFIC_PAPERS_PER_YEAR,
};
use citedist_core::analysis::trajectory::FEATURE_NAMES;
use citedist_core::analysis::{
    enrichment_ratio, kmeans_cluster, mann_whitney_u, rank_scholars, ranking_delta,
    silhouette_score, standardize, trajectory_features, wilcoxon_signed_rank, TestResult,
};
use citedist_core::collabnet::graph_stats;
use citedist_core::corpus::{parse_records, write_records};
use citedist_core::distance::{compute_year, DistanceOptions};
use citedist_core::metrics::all_metrics_as_of;
use citedist_core::synth::{generate_corpus, generate_trajectories, SynthConfig, TrajectoryConfig};
use citedist_core::{
    tables, CollabNetwork, CorpusIndex, DistanceTable, ScholarMetrics, StatsOptions, YearContexts,
};
use serde_json::json;

use crate::args::*;
use crate::workspace::*;

fn load_corpus(ws: &mut Workspace) -> Result<CorpusIndex> {
    let reader = ws.open_artifact(CORPUS, "ingest")?;
    let (records, report) = parse_records(reader)?;
    if report.rejected > 0 {
        bail!(
            "workspace corpus has {} invalid lines; rerun ingest",
            report.rejected
        );
    }
    Ok(CorpusIndex::build(records)?)
}

fn resolve_years(range: &YearRange, corpus: &CorpusIndex) -> Result<(i32, i32)> {
    let (lo, hi) = corpus.year_range().context("corpus is empty")?;
    let (from, to) = match (range.year, range.from, range.to) {
        (Some(y), _, _) => (y, y),
        (None, from, to) => (from.unwrap_or(lo), to.unwrap_or(hi)),
    };
    if from > to {
        bail!("--from {from} is after --to {to}");
    }
    Ok((from, to))
}

pub fn ingest(ws: &mut Workspace, args: &IngestArgs, seed: u64) -> Result<()> {
    let reader = ws.read_input(&args.input)?;
    let (records, report) = parse_records(reader)?;
    let corpus = CorpusIndex::build(records)?;
    {
        let mut out = ws.create(CORPUS)?;
        write_records(&mut out, corpus.records())?;
        out.flush()?;
    }
    let mut summary = serde_json::to_value(&report)?;
    summary["papers"] = json!(corpus.paper_count());
    summary["authors"] = json!(corpus.author_count());
    summary["citations"] = json!(corpus.citation_count());
    summary["dangling_references"] = json!(corpus.dangling_references());
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    ws.create(INGEST_REPORT)?.write_all(text.as_bytes())?;
    print!("{text}");
    let input = ws.display(&args.input);
    ws.write_manifest("ingest", seed, json!({ "input": input }))
}

pub fn graph(ws: &mut Workspace, args: &GraphArgs, seed: u64) -> Result<()> {
    let corpus = load_corpus(ws)?;
    let (from, to) = resolve_years(&args.years, &corpus)?;
    let opts = StatsOptions {
        sample_pairs: args.sample_pairs,
        seed,
        exact_threshold: args.exact_threshold,
    };
    for year in from..=to {
        let net = CollabNetwork::build_window(&corpus, year, args.window)?;
        if !args.no_edges {
            let mut out = ws.create(&format!("graph/edges_{year}.tsv"))?;
            net.write_edge_list(&corpus, &mut out)?;
        }
        let stats = graph_stats(&net, &opts);
        println!(
            "{year}: {} nodes, {} edges, lcc {}, avg degree {:.3}, avg path {}",
            stats.node_count,
            stats.edge_count,
            stats.lcc_size,
            stats.avg_degree,
            stats
                .avg_shortest_path
                .map_or("NA".into(), |p| format!("{p:.3}"))
        );
        tables::write_graph_stats(&[stats], ws.create(&format!("graph/stats_{year}.tsv"))?)?;
    }
    ws.write_manifest(
        "graph",
        seed,
        json!({
            "from": from,
            "to": to,
            "window": args.window,
            "sample_pairs": args.sample_pairs,
            "exact_threshold": args.exact_threshold,
        }),
    )
}

pub fn distances(ws: &mut Workspace, args: &DistancesArgs, seed: u64) -> Result<()> {
    let corpus = load_corpus(ws)?;
    let (from, to) = resolve_years(&args.years, &corpus)?;
    let opts = DistanceOptions {
        depth_cap: args.depth_cap,
    };
    let mut records = Vec::new();
    let mut computed = BTreeMap::new();
    let years: Vec<i32> = corpus
        .citation_years()
        .filter(|y| (from..=to).contains(y))
        .collect();
    for &year in &years {
        let yd = compute_year(&corpus, year, args.window, &opts)?;
        records.extend(yd.records);
        computed.insert(year, yd.context);
    }
    let capped = records
        .iter()
        .filter(|r| matches!(r.distance, citedist_core::Distance::AtLeast(_)))
        .count();
    let (contexts, substitutions) = YearContexts::resolve(computed);
    for s in &substitutions {
        let msg = match s.source_year {
            Some(src) => format!("year {}: {}; using d_bar of {src}", s.year, s.reason),
            None => format!(
                "year {}: {}; no earlier year to fall back on",
                s.year, s.reason
            ),
        };
        eprintln!("warning: {msg}");
        ws.note(msg);
    }
    if let Some(cap) = args.depth_cap {
        let msg = format!("depth cap {cap}: {capped} distances recorded as lower bounds");
        eprintln!("warning: {msg}");
        ws.note(msg);
    }
    tables::write_distances(&corpus, &records, ws.create(DISTANCES)?)?;
    tables::write_year_contexts(&contexts, ws.create(YEAR_CONTEXT)?)?;
    println!(
        "{} citation distances over {} years ({} substituted d_bar)",
        records.len(),
        years.len(),
        substitutions.len()
    );
    ws.write_manifest(
        "distances",
        seed,
        json!({ "from": from, "to": to, "window": args.window, "depth_cap": args.depth_cap }),
    )
}

/// Distance records and contexts, checked to cover every citation made up
/// to `through`.
fn load_distances(
    ws: &mut Workspace,
    corpus: &CorpusIndex,
    through: i32,
) -> Result<(DistanceTable, YearContexts)> {
    let records = tables::read_distances(corpus, ws.open_artifact(DISTANCES, "distances")?)?;
    let contexts = tables::read_year_contexts(ws.open_artifact(YEAR_CONTEXT, "distances")?)?;
    let mut per_year: BTreeMap<i32, usize> = BTreeMap::new();
    for r in &records {
        *per_year.entry(r.citing_year).or_default() += 1;
    }
    for year in corpus.citation_years().filter(|&y| y <= through) {
        let have = per_year.get(&year).copied().unwrap_or(0);
        if have != corpus.citations_in_year(year).len() {
            return Err(MissingArtifact {
                stage: "distances",
                path: ws.path(&format!("{DISTANCES} (citing year {year})")),
            }
            .into());
        }
    }
    Ok((DistanceTable::new(corpus.paper_count(), records), contexts))
}

pub fn metrics(ws: &mut Workspace, args: &MetricsArgs, seed: u64) -> Result<()> {
    let corpus = load_corpus(ws)?;
    let (table, contexts) = load_distances(ws, &corpus, args.as_of)?;
    let metrics = all_metrics_as_of(&corpus, &table, &contexts, args.as_of)?;
    tables::write_metrics(&metrics, ws.create(&metrics_table(args.as_of))?)?;
    let hp = hyperprolific(&corpus, HYPERPROLIFIC_PAPERS_PER_YEAR);
    tables::write_cohort(&hp, ws.create("cohorts/hyperprolific.txt")?)?;
    let ecr = early_career(&corpus, &metrics, args.as_of);
    tables::write_cohort(&ecr, ws.create(&format!("cohorts/ecr_{}.txt", args.as_of))?)?;
    println!(
        "{} authors as of {}; {} hyperprolific, {} early-career",
        metrics.len(),
        args.as_of,
        hp.len(),
        ecr.len()
    );
    ws.write_manifest("metrics", seed, json!({ "as_of": args.as_of }))
}

fn metric_value(m: &ScholarMetrics, metric: Metric) -> f64 {
    match metric {
        Metric::Np => m.np as f64,
        Metric::Tc => m.tc as f64,
        Metric::H => m.h as f64,
        Metric::C => m.c as f64,
        Metric::X => m.x,
    }
}

const TEST_HEADER: &str = "comparison\talternative\tn\tstatistic\tp_value\tmethod";

fn write_test(out: &mut impl Write, name: &str, r: &TestResult) -> std::io::Result<()> {
    writeln!(
        out,
        "{name}\t{}\t{}\t{}\t{}\t{}",
        r.alternative, r.n, r.statistic, r.p_value, r.method
    )
}

pub fn rank_compare(ws: &mut Workspace, args: &RankCompareArgs, seed: u64) -> Result<()> {
    let metrics = tables::read_metrics(ws.open_artifact(&metrics_table(args.as_of), "metrics")?)?;
    let cohort = tables::read_cohort(ws.read_input(&args.cohort)?)?;
    if cohort.is_empty() {
        bail!("cohort file {} lists no authors", args.cohort.display());
    }
    let values = |metric: Metric| -> BTreeMap<String, f64> {
        metrics
            .iter()
            .map(|m| (m.author_id.clone(), metric_value(m, metric)))
            .collect()
    };
    let rank_x = rank_scholars(args.metric.name(), &values(args.metric));
    let rank_base = rank_scholars(args.baseline.name(), &values(args.baseline));
    let deltas = ranking_delta(&rank_x, &rank_base, &cohort)?;

    let label = match &args.label {
        Some(l) => l.clone(),
        None => args
            .cohort
            .file_stem()
            .map_or_else(|| "cohort".into(), |s| s.to_string_lossy().into_owned()),
    };
    let stem = format!(
        "rank_compare/{label}_{}_vs_{}_{}",
        args.metric.name(),
        args.baseline.name(),
        args.as_of
    );
    {
        let mut out = ws.create(&format!("{stem}_deltas.tsv"))?;
        writeln!(
            out,
            "author_id\trank_{}\trank_{}\tdelta",
            args.metric.name(),
            args.baseline.name()
        )?;
        for (id, d) in &deltas {
            writeln!(
                out,
                "{id}\t{}\t{}\t{d}",
                rank_x.get(id).unwrap(),
                rank_base.get(id).unwrap()
            )?;
        }
        out.flush()?;
    }
    let delta_values: Vec<f64> = deltas.values().copied().collect();
    let alternative = args.alternative.into();
    let mut out = ws.create(&format!("{stem}_test.tsv"))?;
    writeln!(out, "{TEST_HEADER}")?;
    let mean = delta_values.iter().sum::<f64>() / delta_values.len() as f64;
    match wilcoxon_signed_rank(&delta_values, alternative) {
        Ok(r) => {
            write_test(&mut out, "wilcoxon_signed_rank", &r)?;
            println!(
                "{label}: n={} mean delta {mean:.2}, W+={} p={:.6} ({}, {})",
                r.n, r.statistic, r.p_value, r.alternative, r.method
            );
        }
        Err(e) => {
            writeln!(out, "wilcoxon_signed_rank\t{alternative}\t0\tNA\tNA\tNA")?;
            ws.note(format!("wilcoxon: {e}"));
            println!("{label}: no test ({e})");
        }
    }
    if let (Some(tiers), Some(a), Some(b)) = (&args.tiers, &args.tier_a, &args.tier_b) {
        let mut tier_of = BTreeMap::new();
        for (i, line) in ws.read_input(tiers)?.lines().enumerate() {
            let line = line?;
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, tier) = line.split_once('\t').with_context(|| {
                format!("{}:{}: expected author_id<TAB>tier", tiers.display(), i + 1)
            })?;
            tier_of.insert(id.to_owned(), tier.to_owned());
        }
        let group = |t: &str| -> Vec<f64> {
            deltas
                .iter()
                .filter(|(id, _)| tier_of.get(*id).is_some_and(|x| x == t))
                .map(|(_, &d)| d)
                .collect()
        };
        let (ga, gb) = (group(a), group(b));
        if ga.is_empty() || gb.is_empty() {
            bail!(
                "tier comparison needs cohort members in both `{a}` ({}) and `{b}` ({})",
                ga.len(),
                gb.len()
            );
        }
        let r = mann_whitney_u(&ga, &gb, alternative)?;
        write_test(&mut out, &format!("mann_whitney_u:{a}:{b}"), &r)?;
        println!(
            "{a} vs {b}: U={} p={:.6} ({})",
            r.statistic, r.p_value, r.method
        );
    }
    out.flush()?;
    ws.write_manifest(
        "rank_compare",
        seed,
        json!({
            "label": label,
            "metric": args.metric.name(),
            "baseline": args.baseline.name(),
            "alternative": alternative.to_string(),
            "as_of": args.as_of,
            "tier_a": args.tier_a,
            "tier_b": args.tier_b,
        }),
    )
}

fn indicator(metric: Metric) -> fn(&ScholarMetrics) -> f64 {
    match metric {
        Metric::Np => |m| m.np as f64,
        Metric::Tc => |m| m.tc as f64,
        Metric::H => |m| m.h as f64,
        Metric::C => |m| m.c as f64,
        Metric::X => |m| m.x,
    }
}

pub fn trajectory(ws: &mut Workspace, args: &TrajectoryArgs, seed: u64) -> Result<()> {
    let series: Vec<CareerSeries> = match &args.series {
        Some(path) => {
            let series = tables::read_series(ws.read_input(path)?)?;
            tables::write_series(&series, ws.create(TRAJECTORY_SERIES)?)?;
            series
        }
        None => {
            let corpus = load_corpus(ws)?;
            let last_year = match args.last_year {
                Some(y) => y,
                None => corpus.year_range().context("corpus is empty")?.1,
            };
            let (table, contexts) = load_distances(ws, &corpus, last_year)?;
            let series = career_series(
                &corpus,
                &table,
                &contexts,
                last_year,
                args.min_citations,
                indicator(args.metric),
            )?;
            tables::write_series(&series, ws.create(TRAJECTORY_SERIES)?)?;
            series
        }
    };
    let rows = series
        .iter()
        .map(|s| Ok((s.author_id.clone(), trajectory_features(&s.values)?)))
        .collect::<Result<Vec<_>>>()?;
    tables::write_features(&rows, ws.create(TRAJECTORY_FEATURES)?)?;
    println!("{} trajectories", rows.len());
    ws.write_manifest(
        "trajectory",
        seed,
        json!({
            "metric": args.metric.name(),
            "last_year": args.last_year,
            "min_citations": args.min_citations,
            "series": args.series.as_ref().map(|p| ws.display(p)),
        }),
    )
}

pub fn cluster(ws: &mut Workspace, args: &ClusterArgs, seed: u64) -> Result<()> {
    let rows = tables::read_features(ws.open_artifact(TRAJECTORY_FEATURES, "trajectory")?)?;
    let raw: Vec<Vec<f64>> = rows.iter().map(|(_, v)| v.clone()).collect();
    let points = standardize(&raw);
    let (k_min, k_max) = match args.k {
        Some(k) => (k as usize, k as usize),
        None => (args.k_min as usize, args.k_max as usize),
    };
    if k_min > k_max {
        bail!("--k-min {k_min} exceeds --k-max {k_max}");
    }
    if points.len() <= k_min {
        bail!(
            "{} trajectories are too few to form {k_min} clusters",
            points.len()
        );
    }
    let k_max = k_max.min(points.len() - 1);
    let sweep: Vec<SweepEntry> = if k_min == k_max {
        let fit = kmeans_cluster(&points, k_min, seed)?;
        let silhouette = silhouette_score(&points, &fit.labels)?;
        vec![SweepEntry {
            k: k_min,
            silhouette,
            fit,
        }]
    } else {
        silhouette_sweep(&points, k_min..=k_max, seed)?
    };
    {
        let mut out = ws.create("silhouette.tsv")?;
        writeln!(out, "k\tsilhouette\tinertia")?;
        for e in &sweep {
            writeln!(out, "{}\t{}\t{}", e.k, e.silhouette, e.fit.inertia)?;
        }
        out.flush()?;
    }
    // Highest silhouette; the smaller k wins ties.
    let best = sweep
        .iter()
        .fold(None::<&SweepEntry>, |best, e| match best {
            Some(b) if b.silhouette >= e.silhouette => Some(b),
            _ => Some(e),
        })
        .expect("nonempty sweep");
    let labels = &best.fit.labels;
    {
        let mut out = ws.create("clusters.tsv")?;
        writeln!(out, "author_id\tcluster")?;
        for ((id, _), l) in rows.iter().zip(labels) {
            writeln!(out, "{id}\t{l}")?;
        }
        out.flush()?;
    }
    {
        let profiles = cluster_profiles(&raw, labels);
        let mut out = ws.create("profiles.tsv")?;
        writeln!(out, "cluster\tsize\t{}", FEATURE_NAMES.join("\t"))?;
        for (c, means) in profiles.iter().enumerate() {
            write!(out, "{c}\t{}", best.fit.sizes[c])?;
            for m in means {
                write!(out, "\t{m:.6}")?;
            }
            writeln!(out)?;
        }
        out.flush()?;
    }
    println!(
        "k={} silhouette {:.4}, cluster sizes {:?}",
        best.k, best.silhouette, best.fit.sizes
    );
    if let Some(flags_path) = &args.flags {
        if best.k != 2 {
            bail!("enrichment needs two clusters, the chosen k is {}", best.k);
        }
        let flagged_ids: BTreeSet<String> = tables::read_cohort(ws.read_input(flags_path)?)?
            .into_iter()
            .collect();
        let flagged: Vec<bool> = rows
            .iter()
            .map(|(id, _)| flagged_ids.contains(id))
            .collect();
        let present = flagged.iter().filter(|&&f| f).count();
        if present < flagged_ids.len() {
            ws.note(format!(
                "{} flagged authors have no trajectory and were ignored",
                flagged_ids.len() - present
            ));
        }
        let e = enrichment_ratio(labels, &flagged)?;
        let mut out = ws.create("enrichment.tsv")?;
        writeln!(
            out,
            "cluster1_size\tflagged1\tratio1\tcluster0_size\tflagged0\tratio0\tenrichment"
        )?;
        writeln!(
            out,
            "{}\t{}\t{:.6}\t{}\t{}\t{:.6}\t{:.4}",
            e.cluster1_count,
            e.flagged1,
            e.ratio1,
            e.cluster0_count,
            e.flagged0,
            e.ratio0,
            e.enrichment
        )?;
        out.flush()?;
        println!(
            "enrichment {:.2} ({:.2}% vs {:.2}%)",
            e.enrichment,
            100.0 * e.ratio1,
            100.0 * e.ratio0
        );
    }
    ws.write_manifest(
        "cluster",
        seed,
        json!({ "k": args.k, "k_min": k_min, "k_max": k_max, "chosen_k": best.k }),
    )
}

fn merge_json(base: &mut serde_json::Value, patch: serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                merge_json(b.entry(k).or_insert(serde_json::Value::Null), v);
            }
        }
        (b, p) => *b = p,
    }
}

/// Preset config with fields from the optional JSON file laid over it.
fn synth_config<T: serde::Serialize + serde::de::DeserializeOwned>(
    ws: &mut Workspace,
    preset: T,
    path: Option<&std::path::Path>,
) -> Result<T> {
    let mut value = serde_json::to_value(preset)?;
    if let Some(path) = path {
        let patch: serde_json::Value = serde_json::from_reader(ws.read_input(path)?)
            .with_context(|| format!("{} is not valid JSON", path.display()))?;
        merge_json(&mut value, patch);
    }
    serde_json::from_value(value).context("invalid synth configuration")
}

pub fn synth(ws: &mut Workspace, args: &SynthArgs, seed: u64) -> Result<()> {
    let out_dir = args.out.clone().unwrap_or_else(|| ws.path("synth"));
    let file = |name: &str| out_dir.join(name);
    let config = match args.kind {
        SynthKind::Corpus => {
            let preset = match args.preset {
                Preset::Default => SynthConfig::default(),
                Preset::Throughput => SynthConfig::throughput(),
            };
            let mut cfg: SynthConfig = synth_config(ws, preset, args.config.as_deref())?;
            cfg.seed = seed;
            let corpus = generate_corpus(&cfg)?;
            let mut out = ws.create_at(&file("corpus.jsonl"))?;
            write_records(&mut out, &corpus.records)?;
            out.flush()?;
            tables::write_cohort(&corpus.hp_authors, ws.create_at(&file("hp.txt"))?)?;
            tables::write_cohort(&corpus.ta_authors, ws.create_at(&file("ta.txt"))?)?;
            let citations: usize = corpus.records.iter().map(|r| r.reference_ids.len()).sum();
            println!(
                "{} papers, {} citations, {} hyperprolific and {} high-reach authors",
                corpus.records.len(),
                citations,
                corpus.hp_authors.len(),
                corpus.ta_authors.len()
            );
            serde_json::to_value(&cfg)?
        }
        SynthKind::Trajectories => {
            let mut cfg: TrajectoryConfig =
                synth_config(ws, TrajectoryConfig::default(), args.config.as_deref())?;
            cfg.seed = seed;
            let ts = generate_trajectories(&cfg)?;
            let series: Vec<CareerSeries> = ts
                .iter()
                .map(|t| CareerSeries {
                    author_id: t.author_id.clone(),
                    first_year: 1,
                    values: t.series.clone(),
                })
                .collect();
            tables::write_series(&series, ws.create_at(&file("trajectory_series.tsv"))?)?;
            let ids =
                |keep: fn(&citedist_core::synth::SyntheticTrajectory) -> bool| -> Vec<String> {
                    ts.iter()
                        .filter(|t| keep(t))
                        .map(|t| t.author_id.clone())
                        .collect()
                };
            tables::write_cohort(&ids(|t| t.flagged), ws.create_at(&file("flagged.txt"))?)?;
            tables::write_cohort(&ids(|t| t.breakout), ws.create_at(&file("breakout.txt"))?)?;
            println!("{} synthetic trajectories", ts.len());
            serde_json::to_value(&cfg)?
        }
    };
    let mut file = ws.create_at(&file("config.json"))?;
    file.write_all((serde_json::to_string_pretty(&config)? + "\n").as_bytes())?;
    file.flush()?;
    drop(file);
    ws.write_manifest(
        "synth",
        seed,
        json!({ "kind": format!("{:?}", args.kind).to_lowercase(), "config": config }),
    )
}
