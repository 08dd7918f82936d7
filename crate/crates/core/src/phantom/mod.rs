//! Seeded phantom and direction generators, and the per-sample pipeline
//! that pairs them with a transport run.

mod generator;
mod grf;
mod ranges;

pub use generator::{
    generate_id_phantom, generate_ood_phantom, sample_direction, Component, DirectionKind, Phantom, SkinLine,
};
pub use grf::{sample_grf, GrfSpec};
pub use ranges::{ComponentRanges, Interval, SkinRanges, TissueRanges, VesselRanges};

use crate::error::{Error, Result};
use crate::grid::{DirectionPair, GeneratorId, GridSpec, ScalarField, SobolevSample};
use crate::seed;
use crate::transport::{simulate_with_jvp, SimConfig, TransportStats};

impl GeneratorId {
    /// Phantom generator used by this pairing.
    pub fn phantom_kind(self) -> DirectionKind {
        match self {
            GeneratorId::Id1 | GeneratorId::Id2 => DirectionKind::TissueMimicking,
            GeneratorId::Ood => DirectionKind::Generic,
        }
    }

    /// Direction generator used by this pairing.
    pub fn direction_kind(self) -> DirectionKind {
        match self {
            GeneratorId::Id1 => DirectionKind::TissueMimicking,
            GeneratorId::Id2 | GeneratorId::Ood => DirectionKind::Generic,
        }
    }
}

/// Phantom for a generator pairing.
pub fn generate_phantom(id: GeneratorId, grid: &GridSpec, ranges: &TissueRanges, seed: u64) -> Result<Phantom> {
    match id.phantom_kind() {
        DirectionKind::TissueMimicking => generate_id_phantom(grid, ranges, seed),
        DirectionKind::Generic => generate_ood_phantom(grid, ranges, seed),
    }
}

/// Phantom and direction of the dataset sample with this `seed`, drawn from
/// separate derived streams.
pub fn sample_inputs(
    generator_id: GeneratorId,
    grid: &GridSpec,
    ranges: &TissueRanges,
    seed: u64,
) -> Result<(Phantom, DirectionPair)> {
    let phantom = generate_phantom(generator_id, grid, ranges, seed::derive(seed, seed::DOMAIN_PHANTOM))?;
    let direction = sample_direction(
        grid,
        generator_id.direction_kind(),
        ranges,
        seed::derive(seed, seed::DOMAIN_DIRECTION),
    )?;
    Ok((phantom, direction))
}

/// Transport seed of the dataset sample with this `seed`.
pub fn transport_seed(seed: u64) -> u64 {
    seed::derive(seed, seed::DOMAIN_TRANSPORT)
}

/// A dataset sample together with its provenance.
#[derive(Debug, Clone)]
pub struct GeneratedSample {
    pub sample: SobolevSample,
    pub phantom: Phantom,
    pub direction_kind: DirectionKind,
    pub escaped_fraction: f64,
    /// RMS standard error of the stored energy field, if estimable.
    pub energy_stderr: Option<f64>,
    pub stats: TransportStats,
}

/// Builds one training record. The phantom, direction and transport draw
/// from separate streams derived from `seed`; `sim_config.seed` is ignored.
/// Energy and derivative are per launched photon times `incident_energy`.
pub fn make_dataset_sample(
    generator_id: GeneratorId,
    grid: &GridSpec,
    ranges: &TissueRanges,
    sim_config: &SimConfig,
    incident_energy: f64,
    seed: u64,
) -> Result<GeneratedSample> {
    if !(incident_energy.is_finite() && incident_energy > 0.0) {
        return Err(Error::InvalidConfig(format!("incident energy must be > 0, got {incident_energy}")));
    }
    let (phantom, direction) = sample_inputs(generator_id, grid, ranges, seed)?;
    let direction_kind = generator_id.direction_kind();
    let config = sim_config.with_seed(transport_seed(seed));
    let result = simulate_with_jvp(&phantom.optical, &direction, &config)?;
    let energy_stderr = result.rms_energy_stderr().map(|se| se * incident_energy);
    let scale = |f: ScalarField| {
        let (grid, kind) = (*f.grid(), f.kind());
        ScalarField::new(grid, kind, f.into_values().into_iter().map(|v| v * incident_energy).collect())
    };
    let energy = scale(result.energy)?;
    let jvp = scale(result.energy_jvp.expect("derivative requested"))?;
    let sample = SobolevSample::new(
        phantom.optical.clone(),
        energy,
        direction,
        jvp,
        generator_id,
        seed,
        config.photon_count,
    )?;
    Ok(GeneratedSample {
        sample,
        phantom,
        direction_kind,
        escaped_fraction: result.escaped_fraction,
        energy_stderr,
        stats: result.stats,
    })
}
