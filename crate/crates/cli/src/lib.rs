//! Command-line front end: one subcommand per pipeline stage, all sharing a
//! flat-file workspace.

pub mod args;
mod stages;
pub mod workspace;

use std::ffi::OsString;

use clap::Parser;

use args::{Cli, Command};
use workspace::{MissingArtifact, Workspace};

/// Exit status for a stage whose prerequisite artifact is absent.
pub const EXIT_MISSING_ARTIFACT: i32 = 2;

/// Parse `args` (program name first) and run the selected stage, returning
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<MissingArtifact>().is_some() {
                EXIT_MISSING_ARTIFACT
            } else {
                1
            }
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers as usize)
        .build()?;
    let mut ws = Workspace::open(&cli.workspace)?;
    let seed = cli.seed;
    pool.install(|| match &cli.command {
        Command::Ingest(a) => stages::ingest(&mut ws, a, seed),
        Command::Graph(a) => stages::graph(&mut ws, a, seed),
        Command::Distances(a) => stages::distances(&mut ws, a, seed),
        Command::Metrics(a) => stages::metrics(&mut ws, a, seed),
        Command::RankCompare(a) => stages::rank_compare(&mut ws, a, seed),
        Command::Trajectory(a) => stages::trajectory(&mut ws, a, seed),
        Command::Cluster(a) => stages::cluster(&mut ws, a, seed),
        Command::Synth(a) => stages::synth(&mut ws, a, seed),
    })
}
