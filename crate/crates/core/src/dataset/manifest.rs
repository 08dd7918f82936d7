//! `manifest.json`: the index of a dataset directory.
//!
//! Sample files are listed with their split, generator, seed and SHA-256.
//! The manifest is written after every sample file, so a directory with a
//! manifest is complete.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::container::{read_file, sha256_hex, write_file};
use crate::error::{Error, Result};
use crate::grid::{GeneratorId, GridSpec};
use crate::scaling::LossConfig;
use crate::transport::SimConfig;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;
pub const SAMPLE_EXTENSION: &str = "dlss";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the dataset directory, `/`-separated.
    pub path: String,
    /// Empty when the dataset has no splits.
    pub split: String,
    pub generator_id: GeneratorId,
    pub seed: u64,
    pub sha256: String,
}

impl ManifestEntry {
    /// Sample id used in metric tables: the path without its extension.
    pub fn id(&self) -> &str {
        self.path.strip_suffix(&format!(".{SAMPLE_EXTENSION}")).unwrap_or(&self.path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub sample_format_version: u32,
    pub grid: GridSpec,
    pub sample_count: usize,
    pub generator_counts: BTreeMap<GeneratorId, usize>,
    pub loss: LossConfig,
    /// Factor applied to the simulated per-photon energy and derivative.
    pub incident_energy: f64,
    /// Transport settings; `seed` is replaced per sample.
    pub sim_config: SimConfig,
    pub sim_config_digest: String,
    /// Half-open range of the per-sample seeds.
    pub seed_range: [u64; 2],
    pub files: Vec<ManifestEntry>,
}

/// SHA-256 of the canonical JSON of `config` with the seed zeroed.
pub fn sim_config_digest(config: &SimConfig) -> String {
    let canonical = serde_json::to_vec(&config.with_seed(0)).expect("config serializes");
    sha256_hex(&canonical)
}

pub fn count_by_generator(entries: &[ManifestEntry]) -> BTreeMap<GeneratorId, usize> {
    let mut counts = BTreeMap::new();
    for e in entries {
        *counts.entry(e.generator_id).or_insert(0) += 1;
    }
    counts
}

impl DatasetManifest {
    /// Split names in first-appearance order.
    pub fn splits(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in &self.files {
            if !out.contains(&e.split.as_str()) {
                out.push(&e.split);
            }
        }
        out
    }

    pub fn entries_in<'a>(&'a self, split: &'a str) -> impl Iterator<Item = &'a ManifestEntry> + 'a {
        self.files.iter().filter(move |e| e.split == split)
    }

    pub fn counts_in(&self, split: &str) -> BTreeMap<GeneratorId, usize> {
        let entries: Vec<ManifestEntry> = self.entries_in(split).cloned().collect();
        count_by_generator(&entries)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_file(&dir.join(MANIFEST_FILE), text.as_bytes())
    }

    /// Parses the manifest without checking the directory contents.
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let bytes = read_file(&path)?;
        let m: DatasetManifest = serde_json::from_slice(&bytes).map_err(|e| Error::Manifest {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        if m.format_version == 0 || m.format_version > MANIFEST_VERSION {
            return Err(Error::UnsupportedVersion {
                path,
                found: m.format_version,
                supported: MANIFEST_VERSION,
            });
        }
        Ok(m)
    }

    /// Checks counts, digests and the set of sample files on disk.
    pub fn validate(&self, dir: &Path) -> Result<()> {
        let fail = |reason: String| Error::Manifest {
            path: dir.join(MANIFEST_FILE),
            reason,
        };
        if self.sample_count != self.files.len() {
            return Err(fail(format!(
                "sample_count {} but {} files listed",
                self.sample_count,
                self.files.len()
            )));
        }
        let counts = count_by_generator(&self.files);
        if counts != self.generator_counts {
            return Err(fail(format!(
                "generator_counts {:?} but listed files give {counts:?}",
                self.generator_counts
            )));
        }
        if self.sim_config_digest != sim_config_digest(&self.sim_config) {
            return Err(fail("sim_config_digest does not match sim_config".into()));
        }
        let on_disk = sample_files(dir)?;
        if on_disk.len() != self.files.len() {
            return Err(fail(format!(
                "{} sample files on disk, manifest lists {}",
                on_disk.len(),
                self.files.len()
            )));
        }
        for e in &self.files {
            let path = dir.join(&e.path);
            if !on_disk.contains(&path) {
                return Err(fail(format!("listed sample {} is missing", e.path)));
            }
            if sha256_hex(&read_file(&path)?) != e.sha256 {
                return Err(fail(format!("checksum mismatch for {}", e.path)));
            }
        }
        Ok(())
    }
}

/// All `.dlss` files in `dir` and its immediate subdirectories.
fn sample_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let list = |d: &Path| -> Result<Vec<PathBuf>> {
        let rd = std::fs::read_dir(d).map_err(|e| Error::io(d, e))?;
        rd.map(|entry| entry.map(|e| e.path()).map_err(|e| Error::io(d, e)))
            .collect()
    };
    for p in list(dir)? {
        if p.is_dir() {
            out.extend(list(&p)?.into_iter().filter(|q| is_sample(q)));
        } else if is_sample(&p) {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

fn is_sample(p: &Path) -> bool {
    p.is_file() && p.extension().is_some_and(|e| e == SAMPLE_EXTENSION)
}
