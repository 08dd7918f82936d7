//! Coefficient ranges for the phantom generators.
//!
//! Every value here is configuration. The defaults are literature-informed
//! placeholders in cm⁻¹ and cm and can be overridden from a TOML file; see
//! `docs/phantom-ranges.md` for the schema.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::grf::GrfSpec;
use crate::error::{Error, Result};

/// Closed interval `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub const fn new(min: f64, max: f64) -> Self {
        Interval { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    /// Linear interpolation, `t` in [0, 1].
    pub fn lerp(&self, t: f64) -> f64 {
        self.min + self.width() * t
    }

    fn validate(&self, what: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min >= 0.0 && self.min <= self.max) {
            return Err(Error::InvalidConfig(format!(
                "{what}: need 0 <= min <= max, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

/// Coefficient ranges and texture of one tissue component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentRanges {
    pub mu_a: Interval,
    pub mu_s_prime: Interval,
    /// Anisotropy, constant for the component.
    pub g: f64,
    /// Spatial fluctuation of the latent field before squashing.
    pub texture: GrfSpec,
}

impl ComponentRanges {
    fn validate(&self, what: &str) -> Result<()> {
        self.mu_a.validate(&format!("{what}.mu_a"))?;
        self.mu_s_prime.validate(&format!("{what}.mu_s_prime"))?;
        if !(0.0..1.0).contains(&self.g) {
            return Err(Error::InvalidConfig(format!("{what}.g must lie in [0, 1), got {}", self.g)));
        }
        self.texture.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VesselRanges {
    pub mu_a: Interval,
    /// Semi-major axis, cm.
    pub radius: Interval,
    /// Minor/major axis ratio.
    pub aspect: Interval,
    /// Upper bound of the per-image vessel count (uniform on 0..=max_count).
    pub max_count: usize,
    /// Amplitude of the random boundary perturbation, relative to the radius.
    pub boundary_roughness: f64,
    pub texture: GrfSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkinRanges {
    /// Mean skin depth as a fraction of the grid depth.
    pub depth_fraction: Interval,
    /// Peak undulation of the skin curve as a fraction of the grid depth.
    pub undulation_fraction: f64,
}

/// Parameter blocks for all generator components.
///
/// Deserializing overlays the given keys on [`TissueRanges::default`] at any
/// depth, so `tissue.mu_a.min` can be set alone. Unknown keys are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(remote = "Self", deny_unknown_fields)]
pub struct TissueRanges {
    pub coupling: ComponentRanges,
    /// Epidermis absorption spans the configured skin-tone range.
    pub epidermis: ComponentRanges,
    pub epidermis_thickness: Interval,
    pub dermis: ComponentRanges,
    pub dermis_thickness: Interval,
    pub dermis_probability: f64,
    /// Tissue below the skin; `tissue.mu_a.min` is the enforced absorption floor.
    pub tissue: ComponentRanges,
    pub vessel: VesselRanges,
    /// Tissue of the generic generator: wider absorption, reaching zero.
    pub generic_tissue: ComponentRanges,
    pub skin: SkinRanges,
    /// RMS of a direction pair relative to the RMS coefficient scale.
    pub direction_fraction: f64,
}

impl Default for TissueRanges {
    fn default() -> Self {
        let smooth = |l, var| GrfSpec {
            correlation_length: l,
            variance: var,
            spectral_exponent: 0.0,
        };
        TissueRanges {
            coupling: ComponentRanges {
                mu_a: Interval::new(0.001, 0.05),
                mu_s_prime: Interval::new(0.1, 1.0),
                g: 0.0,
                texture: smooth(0.5, 0.25),
            },
            epidermis: ComponentRanges {
                mu_a: Interval::new(1.0, 40.0),
                mu_s_prime: Interval::new(20.0, 40.0),
                g: 0.9,
                texture: smooth(0.1, 0.1),
            },
            epidermis_thickness: Interval::new(0.01, 0.03),
            dermis: ComponentRanges {
                mu_a: Interval::new(0.5, 5.0),
                mu_s_prime: Interval::new(15.0, 25.0),
                g: 0.9,
                texture: smooth(0.1, 0.25),
            },
            dermis_thickness: Interval::new(0.05, 0.2),
            dermis_probability: 0.5,
            tissue: ComponentRanges {
                mu_a: Interval::new(0.05, 1.0),
                mu_s_prime: Interval::new(5.0, 20.0),
                g: 0.9,
                texture: smooth(0.3, 1.0),
            },
            vessel: VesselRanges {
                mu_a: Interval::new(5.0, 50.0),
                radius: Interval::new(0.02, 0.2),
                aspect: Interval::new(0.4, 1.0),
                max_count: 8,
                boundary_roughness: 0.3,
                texture: smooth(0.05, 0.05),
            },
            generic_tissue: ComponentRanges {
                mu_a: Interval::new(0.0, 1.5),
                mu_s_prime: Interval::new(5.0, 20.0),
                g: 0.9,
                texture: smooth(0.3, 4.0),
            },
            skin: SkinRanges {
                depth_fraction: Interval::new(0.1, 0.3),
                undulation_fraction: 0.05,
            },
            direction_fraction: 0.1,
        }
    }
}

impl Serialize for TissueRanges {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TissueRanges::serialize(self, serializer)
    }
}

impl<'de> Deserialize<'de> for TissueRanges {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let overrides = toml::Value::deserialize(deserializer)?;
        let mut merged = toml::Value::try_from(TissueRanges::default()).map_err(D::Error::custom)?;
        overlay(&mut merged, overrides);
        TissueRanges::deserialize(merged).map_err(D::Error::custom)
    }
}

/// Recursively replaces entries of `base` with those of `top`; tables merge.
fn overlay(base: &mut toml::Value, top: toml::Value) {
    match (base, top) {
        (toml::Value::Table(b), toml::Value::Table(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => overlay(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl TissueRanges {
    pub fn validate(&self) -> Result<()> {
        self.coupling.validate("coupling")?;
        self.epidermis.validate("epidermis")?;
        self.dermis.validate("dermis")?;
        self.tissue.validate("tissue")?;
        self.generic_tissue.validate("generic_tissue")?;
        self.epidermis_thickness.validate("epidermis_thickness")?;
        self.dermis_thickness.validate("dermis_thickness")?;
        self.vessel.mu_a.validate("vessel.mu_a")?;
        self.vessel.radius.validate("vessel.radius")?;
        self.vessel.aspect.validate("vessel.aspect")?;
        self.vessel.texture.validate()?;
        if self.tissue.mu_a.min <= 0.0 {
            return Err(Error::InvalidConfig(
                "tissue.mu_a.min is the absorption floor and must be > 0".into(),
            ));
        }
        if self.vessel.radius.min <= 0.0 || self.vessel.aspect.min <= 0.0 {
            return Err(Error::InvalidConfig("vessel radius and aspect must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.dermis_probability) {
            return Err(Error::InvalidConfig("dermis_probability must lie in [0, 1]".into()));
        }
        let band = self.skin.depth_fraction;
        band.validate("skin.depth_fraction")?;
        if band.max + self.skin.undulation_fraction >= 1.0 || self.skin.undulation_fraction < 0.0 {
            return Err(Error::InvalidConfig("skin line must stay strictly inside the grid".into()));
        }
        if !(self.direction_fraction.is_finite() && self.direction_fraction > 0.0) {
            return Err(Error::InvalidConfig("direction_fraction must be > 0".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let ranges: TissueRanges =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("tissue ranges: {e}")))?;
        ranges.validate()?;
        Ok(ranges)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("ranges serialize to TOML")
    }
}
