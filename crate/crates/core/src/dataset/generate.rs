//! Dataset generation: a plan of splits × generators, one file per sample.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::container::{read_file, sha256_hex};
use super::manifest::{count_by_generator, sim_config_digest, DatasetManifest, ManifestEntry, MANIFEST_VERSION};
use super::sample::{read_sample, write_sample, SAMPLE_VERSION};
use crate::error::{Error, Result};
use crate::grid::{GeneratorId, GridSpec, SobolevSample};
use crate::phantom::{make_dataset_sample, GeneratedSample, TissueRanges};
use crate::scaling::LossConfig;
use crate::transport::SimConfig;

/// Everything that determines a dataset apart from its plan and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub grid: GridSpec,
    pub ranges: TissueRanges,
    pub sim: SimConfig,
    /// Scale from per-photon deposits to stored energy. The default puts
    /// superficial absorbers above the default σ onset `a = 10⁴` and deep
    /// tissue in its logarithmic range.
    pub incident_energy: f64,
    /// Recorded in the manifest for downstream training and evaluation.
    pub loss: LossConfig,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            grid: GridSpec::default(),
            ranges: TissueRanges::default(),
            sim: SimConfig::default(),
            incident_energy: 1e6,
            loss: LossConfig::default(),
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.ranges.validate()?;
        self.sim.validate(&self.grid)?;
        self.loss.validate()?;
        if !(self.incident_energy.is_finite() && self.incident_energy > 0.0) {
            return Err(Error::InvalidConfig("incident_energy must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    /// Subdirectory name; empty for a flat dataset.
    pub name: String,
    pub counts: BTreeMap<GeneratorId, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetPlan {
    pub splits: Vec<SplitPlan>,
}

impl DatasetPlan {
    /// One flat split with `n` samples of every generator pairing.
    pub fn per_generator(n: usize) -> Self {
        DatasetPlan {
            splits: vec![SplitPlan {
                name: String::new(),
                counts: GeneratorId::ALL.iter().map(|&g| (g, n)).collect(),
            }],
        }
    }

    /// 2048 training and 256 validation samples, half ID1 and half ID2,
    /// plus 128 test samples per generator pairing.
    pub fn reference() -> Self {
        let split = |name: &str, counts: &[(GeneratorId, usize)]| SplitPlan {
            name: name.into(),
            counts: counts.iter().copied().collect(),
        };
        use GeneratorId::*;
        DatasetPlan {
            splits: vec![
                split("train", &[(Id1, 1024), (Id2, 1024)]),
                split("val", &[(Id1, 128), (Id2, 128)]),
                split("test", &[(Id1, 128), (Id2, 128), (Ood, 128)]),
            ],
        }
    }

    pub fn total(&self) -> usize {
        self.splits.iter().flat_map(|s| s.counts.values()).sum()
    }

    /// `(split, generator, index within split and generator)` in generation
    /// order; sample `k` of this list gets seed `base_seed + k`.
    pub fn slots(&self) -> Vec<(&str, GeneratorId, usize)> {
        let mut out = Vec::with_capacity(self.total());
        for s in &self.splits {
            for (&g, &n) in &s.counts {
                out.extend((0..n).map(|i| (s.name.as_str(), g, i)));
            }
        }
        out
    }
}

fn relative_path(split: &str, generator: GeneratorId, index: usize) -> String {
    let file = format!("{}_{index:05}.dlss", generator.tag());
    if split.is_empty() {
        file
    } else {
        format!("{split}/{file}")
    }
}

/// Generates every sample of `plan` into `dir`, then writes the manifest.
/// `on_sample` sees each finished sample (for progress reporting).
pub fn generate_dataset(
    dir: &Path,
    cfg: &GenerationConfig,
    plan: &DatasetPlan,
    base_seed: u64,
    mut on_sample: impl FnMut(&ManifestEntry, &GeneratedSample),
) -> Result<DatasetManifest> {
    cfg.validate()?;
    let total = plan.total() as u64;
    let end_seed = base_seed
        .checked_add(total)
        .ok_or_else(|| Error::InvalidConfig("seed range overflows u64".into()))?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::with_capacity(plan.total());
    for (k, (split, generator, index)) in plan.slots().into_iter().enumerate() {
        let seed = base_seed + k as u64;
        let generated = make_dataset_sample(generator, &cfg.grid, &cfg.ranges, &cfg.sim, cfg.incident_energy, seed)?;
        let rel = relative_path(split, generator, index);
        let path = dir.join(&rel);
        write_sample(&path, &generated.sample)?;
        let entry = ManifestEntry {
            path: rel,
            split: split.to_string(),
            generator_id: generator,
            seed,
            sha256: sha256_hex(&read_file(&path)?),
        };
        on_sample(&entry, &generated);
        files.push(entry);
    }
    let manifest = DatasetManifest {
        format_version: MANIFEST_VERSION,
        sample_format_version: SAMPLE_VERSION,
        grid: cfg.grid,
        sample_count: files.len(),
        generator_counts: count_by_generator(&files),
        loss: cfg.loss,
        incident_energy: cfg.incident_energy,
        sim_config: cfg.sim.with_seed(0),
        sim_config_digest: sim_config_digest(&cfg.sim),
        seed_range: [base_seed, end_seed],
        files,
    };
    manifest.write(dir)?;
    Ok(manifest)
}

/// Reads and validates a dataset, returning its samples in manifest order.
pub fn load_dataset(dir: &Path) -> Result<(DatasetManifest, Vec<(ManifestEntry, SobolevSample)>)> {
    let manifest = DatasetManifest::read(dir)?;
    manifest.validate(dir)?;
    let samples = manifest
        .files
        .iter()
        .map(|e| Ok((e.clone(), read_sample(&dir.join(&e.path))?)))
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, samples))
}
