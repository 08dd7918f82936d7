use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Illumination footprint on the top face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    /// Every photon enters at `center_x`.
    Pencil,
    /// Entry points uniform over `width` around `center_x`, clipped to the grid.
    Strip,
}

/// Source geometry. Photons enter on the top face (z = 0) at the midplane of
/// the extrusion, travelling into the tissue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SourceSpec {
    pub kind: SourceKind,
    /// Lateral beam center in cm; `None` centers the beam on the grid.
    pub center_x: Option<f64>,
    /// Strip width in cm (ignored for pencil beams).
    pub width: f64,
    /// Polar angle of the beam from +z in the x–z plane, radians.
    pub polar_angle: f64,
}

impl Default for SourceSpec {
    fn default() -> Self {
        SourceSpec {
            kind: SourceKind::Strip,
            center_x: None,
            width: 0.4,
            polar_angle: 0.0,
        }
    }
}

impl SourceSpec {
    pub fn pencil() -> Self {
        SourceSpec {
            kind: SourceKind::Pencil,
            ..Self::default()
        }
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if !(self.polar_angle.is_finite() && self.polar_angle.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidConfig(format!(
                "source direction must point into the tissue (polar angle {})",
                self.polar_angle
            )));
        }
        let center = self.center(grid);
        if !(center.is_finite() && (0.0..=grid.width()).contains(&center)) {
            return Err(Error::InvalidConfig(format!(
                "source center {center} cm lies outside the top face [0, {}]",
                grid.width()
            )));
        }
        if self.kind == SourceKind::Strip && !(self.width.is_finite() && self.width >= 0.0) {
            return Err(Error::InvalidConfig(format!("strip width must be >= 0, got {}", self.width)));
        }
        Ok(())
    }

    pub fn center(&self, grid: &GridSpec) -> f64 {
        self.center_x.unwrap_or(0.5 * grid.width())
    }

    /// Lateral entry interval `[lo, hi]` on the top face.
    pub(crate) fn entry_interval(&self, grid: &GridSpec) -> (f64, f64) {
        let c = self.center(grid);
        match self.kind {
            SourceKind::Pencil => (c, c),
            SourceKind::Strip => {
                let lo = (c - 0.5 * self.width).max(0.0);
                let hi = (c + 0.5 * self.width).min(grid.width());
                (lo, hi)
            }
        }
    }

    pub(crate) fn direction(&self) -> [f64; 3] {
        let (s, c) = self.polar_angle.sin_cos();
        [s, 0.0, c]
    }
}

/// Monte Carlo run parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub photon_count: u64,
    pub source: SourceSpec,
    /// Weight below which Russian roulette is played; 0 disables roulette.
    pub roulette_threshold: f64,
    /// Probability that a photon survives roulette.
    pub roulette_survival: f64,
    /// Collision cap per photon; capped photons are booked as escaped.
    pub max_events: u64,
    pub seed: u64,
    /// Number of contiguous photon blocks. Results are bit-identical for a
    /// fixed value, independent of how many threads execute them. Also the
    /// batch count for standard-error estimates.
    pub thread_partitions: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            photon_count: 1_000_000,
            source: SourceSpec::default(),
            roulette_threshold: 1e-4,
            roulette_survival: 0.1,
            max_events: 1_000_000,
            seed: 0,
            thread_partitions: 16,
        }
    }
}

impl SimConfig {
    pub fn with_photons(mut self, photon_count: u64) -> Self {
        self.photon_count = photon_count;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn without_roulette(mut self) -> Self {
        self.roulette_threshold = 0.0;
        self
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if self.photon_count == 0 {
            return Err(Error::InvalidConfig("photon_count must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.roulette_threshold) {
            return Err(Error::InvalidConfig(format!(
                "roulette_threshold must lie in [0, 1), got {}",
                self.roulette_threshold
            )));
        }
        if !(self.roulette_survival > 0.0 && self.roulette_survival <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "roulette_survival must lie in (0, 1], got {}",
                self.roulette_survival
            )));
        }
        if self.max_events == 0 {
            return Err(Error::InvalidConfig("max_events must be >= 1".into()));
        }
        if self.thread_partitions == 0 {
            return Err(Error::InvalidConfig("thread_partitions must be >= 1".into()));
        }
        self.source.validate(grid)
    }
}
