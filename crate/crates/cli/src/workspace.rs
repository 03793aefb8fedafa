use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const CORPUS: &str = "corpus.jsonl";
pub const INGEST_REPORT: &str = "ingest_report.json";
pub const DISTANCES: &str = "distances.tsv";
pub const YEAR_CONTEXT: &str = "year_context.tsv";
pub const TRAJECTORY_SERIES: &str = "trajectory_series.tsv";
pub const TRAJECTORY_FEATURES: &str = "trajectory_features.tsv";

pub fn metrics_table(year: i32) -> String {
    format!("metrics_{year}.tsv")
}

/// A stage input that an earlier stage should have produced.
#[derive(Debug)]
pub struct MissingArtifact {
    pub stage: &'static str,
    pub path: PathBuf,
}

impl fmt::Display for MissingArtifact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "missing {}; run the `{}` stage first",
            self.path.display(),
            self.stage
        )
    }
}

impl std::error::Error for MissingArtifact {}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    stage: &'a str,
    engine_version: &'a str,
    seed: u64,
    config: serde_json::Value,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    notes: Vec<String>,
}

/// The flat-file store shared by all stages, plus bookkeeping for the
/// current run's manifest.
pub struct Workspace {
    root: PathBuf,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    notes: Vec<String>,
}

impl Workspace {
    pub fn open(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)
            .with_context(|| format!("cannot create workspace {}", root.display()))?;
        Ok(Workspace {
            root: root.to_owned(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            notes: Vec::new(),
        })
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    /// Path of an artifact produced by `stage`, recorded as an input.
    pub fn require(&mut self, rel: &str, stage: &'static str) -> Result<PathBuf> {
        let path = self.path(rel);
        if !path.is_file() {
            return Err(MissingArtifact { stage, path }.into());
        }
        self.inputs.push(path.clone());
        Ok(path)
    }

    /// Open a file from outside the workspace (or anywhere) as an input.
    pub fn read_input(&mut self, path: &Path) -> Result<BufReader<File>> {
        let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        self.inputs.push(path.to_owned());
        Ok(BufReader::new(file))
    }

    pub fn open_artifact(&mut self, rel: &str, stage: &'static str) -> Result<BufReader<File>> {
        let path = self.require(rel, stage)?;
        Ok(BufReader::new(File::open(&path).with_context(|| {
            format!("cannot open {}", path.display())
        })?))
    }

    /// Create an output file relative to the workspace root.
    pub fn create(&mut self, rel: &str) -> Result<BufWriter<File>> {
        self.create_at(&self.path(rel))
    }

    pub fn create_at(&mut self, path: &Path) -> Result<BufWriter<File>> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let file =
            File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
        self.outputs.push(path.to_owned());
        Ok(BufWriter::new(file))
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Paths inside the workspace are recorded relative to it, so manifests
    /// of two workspaces built from the same inputs are comparable.
    pub fn display(&self, path: &Path) -> String {
        path.strip_prefix(&self.root)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/")
    }

    fn digest(&self, path: &Path) -> Result<FileDigest> {
        let mut file =
            File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
        let mut hasher = Sha256::new();
        let mut buf = vec![0u8; 1 << 16];
        loop {
            let n = file.read(&mut buf)?;
            if n == 0 {
                break;
            }
            hasher.update(&buf[..n]);
        }
        let hex = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        Ok(FileDigest {
            path: self.display(path),
            sha256: hex,
        })
    }

    /// Write `manifests/<name>.json` describing this run. No timestamps,
    /// so reruns with unchanged inputs reproduce it byte for byte.
    pub fn write_manifest(&self, name: &str, seed: u64, config: serde_json::Value) -> Result<()> {
        let mut inputs: Vec<FileDigest> = self
            .inputs
            .iter()
            .map(|p| self.digest(p))
            .collect::<Result<_>>()?;
        inputs.sort_by(|a, b| a.path.cmp(&b.path));
        inputs.dedup_by(|a, b| a.path == b.path);
        let mut outputs: Vec<FileDigest> = self
            .outputs
            .iter()
            .map(|p| self.digest(p))
            .collect::<Result<_>>()?;
        outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            stage: name,
            engine_version: env!("CARGO_PKG_VERSION"),
            seed,
            config,
            inputs,
            outputs,
            notes: self.notes.clone(),
        };
        let path = self.path(&format!("manifests/{name}.json"));
        fs::create_dir_all(path.parent().expect("manifest dir"))?;
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }
}
