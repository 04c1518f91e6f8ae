//! Flatten run directories into tables.
//!
//! CSV: one `<run>.csv` per run with the columns `alpha, residual,
//! kernel_dim, signature`. `kernel_dim` is empty where the kernel was not
//! assembled (alpha = 0) and `signature` is `positive/negative/zero` where a
//! moduli metric was computed.
//!
//! JSON: a single `runs.json` array with one object per run holding its
//! name, manifest and every JSON or CSV artifact listed in the manifest.

use crate::artifacts::{self, read_manifest, MANIFEST, TABLE};
use crate::pipeline::ContinuationRow;
use anyhow::{bail, Context};
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// `dir` itself when it holds a manifest, otherwise its immediate
/// subdirectories that do, in name order.
pub fn find_runs(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    if dir.join(MANIFEST).is_file() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let mut runs: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(MANIFEST).is_file())
        .collect();
    runs.sort();
    if runs.is_empty() {
        bail!("no manifest in {} or its subdirectories", dir.display());
    }
    Ok(runs)
}

fn run_name(dir: &Path) -> String {
    dir.canonicalize()
        .ok()
        .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "run".into())
}

pub fn read_table(run: &Path) -> anyhow::Result<Vec<ContinuationRow>> {
    let path = run.join(TABLE);
    let mut r = csv::Reader::from_path(&path).with_context(|| format!("reading {}", path.display()))?;
    r.deserialize().collect::<Result<_, _>>().with_context(|| format!("parsing {}", path.display()))
}

/// Write the export files into `out` and return their paths.
pub fn export(dir: &Path, format: Format, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let runs = find_runs(dir)?;
    let mut written = Vec::new();
    match format {
        Format::Csv => {
            for run in &runs {
                let man = read_manifest(run)?;
                if !man.artifacts.iter().any(|a| a == TABLE) {
                    continue;
                }
                let rows = read_table(run)?;
                let path = out.join(format!("{}.csv", run_name(run)));
                artifacts::write_atomic(&path, &artifacts::csv_bytes(&rows)?)?;
                written.push(path);
            }
            if written.is_empty() {
                bail!("none of the runs in {} has a solver table", dir.display());
            }
        }
        Format::Json => {
            let mut all = Vec::new();
            for run in &runs {
                let man = read_manifest(run)?;
                let mut arts = Map::new();
                for name in &man.artifacts {
                    let path = run.join(name);
                    let value = if name.ends_with(".json") {
                        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
                    } else if name == TABLE {
                        serde_json::to_value(read_table(run)?)?
                    } else {
                        continue;
                    };
                    arts.insert(name.clone(), value);
                }
                all.push(json!({ "run": run_name(run), "manifest": man, "artifacts": Value::Object(arts) }));
            }
            let path = out.join("runs.json");
            artifacts::write_json(&path, &all)?;
            written.push(path);
        }
    }
    Ok(written)
}
