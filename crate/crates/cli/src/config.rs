//! Run configuration: a TOML file, then command-line overrides. The merged
//! result is echoed to `resolved_config.toml` in the output directory, and
//! passing that file back via `--config` replays the run.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use tissuelight_core::dataset::GenerationConfig;
use tissuelight_core::{GeneratorId, GridSpec, LossConfig, SimConfig, TissueRanges};

use crate::CliError;

pub const RESOLVED_CONFIG: &str = "resolved_config.toml";

/// Where the derivative direction of a simulation comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DirectionSource {
    /// Drawn from the generator pairing with the run seed.
    Sample,
    /// All zeros; the derivative output is identically zero.
    Zero,
    /// Taken from the input sample file.
    File,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSettings {
    /// Samples per generator pairing in one flat directory; unset selects
    /// the train/val/test reference split.
    pub per_generator: Option<usize>,
    /// Restricts a flat dataset to one generator pairing.
    pub generator: Option<GeneratorId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSettings {
    pub generator: GeneratorId,
    /// Optional `.dlss` input providing the optical image (and direction).
    pub phantom: Option<PathBuf>,
    pub direction: DirectionSource,
}

impl Default for SimulateSettings {
    fn default() -> Self {
        SimulateSettings {
            generator: GeneratorId::Id1,
            phantom: None,
            direction: DirectionSource::Sample,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSettings {
    pub generator: GeneratorId,
    pub grid: GridSpec,
    pub photons: u64,
    /// Relative step: coefficients are perturbed by up to this fraction.
    pub epsilon: f64,
    /// Maximum relative L2 error at `epsilon`.
    pub tolerance: f64,
    /// Pixels with |derivative| below this fraction of the maximum are
    /// left out of the comparison.
    pub significance: f64,
    pub direction: DirectionSource,
}

impl Default for ValidateSettings {
    fn default() -> Self {
        ValidateSettings {
            generator: GeneratorId::Id1,
            grid: GridSpec::square(16, 0.015).expect("valid grid"),
            photons: 10_000_000,
            epsilon: 0.25,
            tolerance: 0.05,
            significance: 0.01,
            direction: DirectionSource::Sample,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSettings {
    pub dataset: Option<PathBuf>,
    pub baseline: Option<PathBuf>,
    pub model: Option<PathBuf>,
    /// Split to evaluate; defaults to `test` when present, else everything.
    pub split: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: Option<usize>,
    pub incident_energy: f64,
    pub grid: GridSpec,
    pub sim: SimConfig,
    pub loss: LossConfig,
    pub ranges: TissueRanges,
    pub generate: GenerateSettings,
    pub simulate: SimulateSettings,
    pub validate_jvp: ValidateSettings,
    pub evaluate: EvaluateSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        let generation = GenerationConfig::default();
        RunConfig {
            seed: 0,
            threads: None,
            incident_energy: generation.incident_energy,
            grid: generation.grid,
            sim: generation.sim,
            loss: generation.loss,
            ranges: generation.ranges,
            generate: GenerateSettings::default(),
            simulate: SimulateSettings::default(),
            validate_jvp: ValidateSettings::default(),
            evaluate: EvaluateSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn generation(&self) -> GenerationConfig {
        GenerationConfig {
            grid: self.grid,
            ranges: self.ranges,
            sim: self.sim,
            incident_energy: self.incident_energy,
            loss: self.loss,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    pub fn echo(&self, out: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        let path = out.join(RESOLVED_CONFIG);
        std::fs::write(&path, self.to_toml()).map_err(|e| CliError::io(&path, e))
    }
}

/// `N` or `NXxNZ`, spacing and extrusion taken from the base grid.
pub fn parse_grid(text: &str, base: &GridSpec) -> Result<GridSpec, CliError> {
    let bad = || CliError::Config(format!("--grid expects N or NXxNZ, got '{text}'"));
    let (nx, nz) = match text.split_once(['x', 'X']) {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let n = text.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    Ok(GridSpec::new(nx, nz, base.dx, base.dz, nx, base.dy)?)
}
