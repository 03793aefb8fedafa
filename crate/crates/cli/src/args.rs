use std::path::PathBuf;

use citedist_core::analysis::Alternative;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_WORKSPACE: &str = "citedist-workspace";

#[derive(Debug, Parser)]
#[command(
    name = "citedist",
    version,
    about = "Citation-distance scholar metrics pipeline"
)]
pub struct Cli {
    /// Directory holding every stage's artifacts.
    #[arg(long, global = true, env = "CITEDIST_WORKSPACE", default_value = DEFAULT_WORKSPACE)]
    pub workspace: PathBuf,

    /// Worker threads for the parallel stages.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: u32,

    /// Master seed for every random choice (pair sampling, k-means, synthesis).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a line-delimited corpus and store it in the workspace.
    Ingest(IngestArgs),
    /// Build collaboration networks and report their LCC statistics.
    Graph(GraphArgs),
    /// Annotate every citation with its collaboration distance.
    Distances(DistancesArgs),
    /// Per-author np, tc, h, c, x as of a cutoff year.
    Metrics(MetricsArgs),
    /// Rank deltas of a cohort between two metrics, with a one-sided test.
    RankCompare(RankCompareArgs),
    /// Career-year series and trajectory features.
    Trajectory(TrajectoryArgs),
    /// k-means clustering of trajectory features.
    Cluster(ClusterArgs),
    /// Generate a synthetic corpus or synthetic trajectories.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Line-delimited JSON records.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct YearRange {
    /// Single year; shorthand for --from Y --to Y.
    #[arg(long, conflicts_with_all = ["from", "to"])]
    pub year: Option<i32>,
    #[arg(long)]
    pub from: Option<i32>,
    #[arg(long)]
    pub to: Option<i32>,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[command(flatten)]
    pub years: YearRange,
    /// Window length in years, ending at the network year.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub window: u32,
    /// Sampled pairs for the average path length; 0 computes it exactly.
    #[arg(long, default_value_t = 10_000)]
    pub sample_pairs: u64,
    /// LCCs up to this many nodes are always measured exactly.
    #[arg(long, default_value_t = 2_000)]
    pub exact_threshold: usize,
    /// Skip writing the edge lists.
    #[arg(long)]
    pub no_edges: bool,
}

#[derive(Debug, Args)]
pub struct DistancesArgs {
    #[command(flatten)]
    pub years: YearRange,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub window: u32,
    /// Stop each BFS at this depth; farther distances are stored as lower bounds.
    #[arg(long)]
    pub depth_cap: Option<u32>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Cutoff year (inclusive) for papers and citations.
    #[arg(long)]
    pub as_of: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Np,
    Tc,
    H,
    C,
    X,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Np => "np",
            Metric::Tc => "tc",
            Metric::H => "h",
            Metric::C => "c",
            Metric::X => "x",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlternativeArg {
    Less,
    Greater,
}

impl From<AlternativeArg> for Alternative {
    fn from(a: AlternativeArg) -> Self {
        match a {
            AlternativeArg::Less => Alternative::Less,
            AlternativeArg::Greater => Alternative::Greater,
        }
    }
}

#[derive(Debug, Args)]
pub struct RankCompareArgs {
    /// Author ids, one per line.
    #[arg(long)]
    pub cohort: PathBuf,
    #[arg(long, value_enum, default_value_t = Metric::X)]
    pub metric: Metric,
    #[arg(long, value_enum, default_value_t = Metric::Np)]
    pub baseline: Metric,
    #[arg(long, value_enum, default_value_t = AlternativeArg::Less)]
    pub alternative: AlternativeArg,
    #[arg(long)]
    pub as_of: i32,
    /// Tab-separated author_id and tier label; enables a Mann-Whitney
    /// comparison of deltas between --tier-a and --tier-b.
    #[arg(long, requires_all = ["tier_a", "tier_b"])]
    pub tiers: Option<PathBuf>,
    #[arg(long, requires = "tiers")]
    pub tier_a: Option<String>,
    #[arg(long, requires = "tiers")]
    pub tier_b: Option<String>,
    /// Name used in output file names; defaults to the cohort file stem.
    #[arg(long)]
    pub label: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrajectoryArgs {
    #[arg(long, value_enum, default_value_t = Metric::X)]
    pub metric: Metric,
    /// Last calendar year a tenth career year may fall in; defaults to the
    /// last year of the corpus.
    #[arg(long)]
    pub last_year: Option<i32>,
    /// Citations required by the end of career year 10.
    #[arg(long, default_value_t = 10)]
    pub min_citations: u64,
    /// Use an existing series table instead of computing one from the corpus.
    #[arg(long)]
    pub series: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Fixed number of clusters; without it the k with the best silhouette
    /// in [k-min, k-max] is used.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub k: Option<u32>,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(2..))]
    pub k_min: u32,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(2..))]
    pub k_max: u32,
    /// Author ids to report enrichment for (requires two clusters).
    #[arg(long)]
    pub flags: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Corpus,
    Trajectories,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Default,
    Throughput,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value_t = SynthKind::Corpus)]
    pub kind: SynthKind,
    #[arg(long, value_enum, default_value_t = Preset::Default)]
    pub preset: Preset,
    /// JSON file overriding the preset's configuration (its seed is ignored
    /// in favour of --seed).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; defaults to `synth/` in the workspace.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
