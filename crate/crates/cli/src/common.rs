//! Shared helpers: dataset reloading and run-manifest emission.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use automata_pipeline::{
    parse_sample_at, read_dataset_lines, read_manifest, Dataset, DatasetManifest, Sample, Split,
    Task,
};

/// Resolves a `--data` argument that may be a manifest file or a directory
/// holding `manifest.json`.
pub fn resolve_manifest_path(data: &Path) -> PathBuf {
    if data.is_dir() {
        data.join("manifest.json")
    } else {
        data.to_path_buf()
    }
}

/// Reloads a generated dataset from its manifest: parses every line back
/// into a triad and reassigns splits positionally.
pub fn load_dataset(data: &Path) -> Result<Dataset> {
    let manifest_path = resolve_manifest_path(data);
    let manifest: DatasetManifest = read_manifest(&manifest_path)
        .with_context(|| format!("reading manifest {}", manifest_path.display()))?;
    let dir = manifest_path
        .parent()
        .context("manifest path has no parent directory")?;
    let dataset_path = dir.join(&manifest.dataset_file);
    let lines = read_dataset_lines(&dataset_path)
        .with_context(|| format!("reading dataset {}", dataset_path.display()))?;
    let expected = manifest.n_train + manifest.n_validation + manifest.n_test;
    if lines.len() != expected {
        bail!(
            "dataset {} holds {} lines but the manifest declares {}",
            dataset_path.display(),
            lines.len(),
            expected
        );
    }

    let mut samples = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let (ic, gs2, rm) = parse_sample_at(line, manifest.task, i + 1)?;
        let split = if i < manifest.n_train {
            Split::Train
        } else if i < manifest.n_train + manifest.n_validation {
            Split::Validation
        } else {
            Split::Test
        };
        samples.push(Sample {
            ic,
            gs2,
            rule_id: rm.id(),
            rm,
            split,
        });
    }
    Ok(Dataset {
        samples,
        task: manifest.task,
        manifest,
    })
}

/// Loads the lines a prediction run should cover: every line of a raw
/// dataset file, or only the test split when given a manifest/directory.
pub fn load_eval_lines(data: &Path, task: Task) -> Result<(Vec<String>, Option<DatasetManifest>)> {
    let is_manifest = data.is_dir()
        || data
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_manifest {
        let manifest_path = resolve_manifest_path(data);
        let manifest = read_manifest(&manifest_path)?;
        if manifest.task != task {
            bail!(
                "--task {} does not match the dataset task {}",
                task,
                manifest.task
            );
        }
        let dir = manifest_path.parent().context("manifest has no parent")?;
        let lines = read_dataset_lines(&dir.join(&manifest.dataset_file))?;
        let skip = manifest.n_train + manifest.n_validation;
        Ok((lines[skip..].to_vec(), Some(manifest)))
    } else {
        Ok((read_dataset_lines(data)?, None))
    }
}

/// Every subcommand records its fully resolved configuration before doing
/// any work, so a run can be reproduced from its output directory alone.
pub fn write_run_manifest<T: Serialize>(out_dir: &Path, resolved: &T) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let json = serde_json::to_string_pretty(resolved)?;
    std::fs::write(out_dir.join("run_manifest.json"), json + "\n")?;
    Ok(())
}
