//! Voxelized Monte Carlo photon transport with a forward-mode derivative.
//!
//! Collisions are MCML-style weighted events: each deposits the fraction
//! μ_a/μ_t of the packet weight and the packet continues with μ_s/μ_t.
//! Alongside the energy tally every photon carries a score `A`, the
//! derivative of its log path weight along the direction pair:
//!
//! * each flight segment of length `s` through a voxel adds `−(v_a + v_s)·s`;
//! * a deposit `D` in voxel `k` contributes `D·A + w·v_a,k/μ_t,k` to the
//!   derivative tally (the second term is `D·v_a/μ_a` written so that it
//!   stays finite at μ_a = 0);
//! * continuing after a scatter adds `v_s,k/μ_s,k`.
//!
//! Roulette does not touch the score since its survival probability does
//! not depend on the coefficients.

mod config;
mod fd;
mod phase;
mod tracer;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use config::{SimConfig, SourceKind, SourceSpec};
pub use fd::{coefficient_relative_direction, finite_difference_jvp, masked_relative_l2, max_stable_epsilon};
pub use phase::{henyey_greenstein_cos_density, sample_henyey_greenstein, Deflection};
pub use tracer::PhotonState;

use crate::error::{Error, Result};
use crate::grid::{direction_to_full_scattering, DirectionPair, FieldKind, OpticalImage, ScalarField};
use tracer::{Tally, Tracer, Voxel};

/// Counters collected over all photon histories.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TransportStats {
    pub photons: u64,
    pub collisions: u64,
    /// Photons stopped by `max_events`; their weight is booked as escaped.
    pub capped: u64,
    pub roulette_terminated: u64,
}

/// Output of a transport run.
#[derive(Debug, Clone)]
pub struct TransportResult {
    /// Deposited fraction of the launched weight per pixel column.
    pub energy: ScalarField,
    /// Directional derivative of `energy`; present for [`simulate_with_jvp`].
    pub energy_jvp: Option<ScalarField>,
    /// Launched weight that left the grid (or hit the event cap).
    pub escaped_fraction: f64,
    /// Batch-means standard error of `energy`, one batch per partition.
    /// `None` with fewer than two partitions.
    pub energy_stderr: Option<ScalarField>,
    pub jvp_stderr: Option<ScalarField>,
    pub stats: TransportStats,
}

impl TransportResult {
    /// Root-mean-square of the per-pixel standard error of `energy`.
    pub fn rms_energy_stderr(&self) -> Option<f64> {
        self.energy_stderr.as_ref().map(|se| {
            let v = se.values();
            (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
        })
    }
}

/// Simulates the absorbed-energy field of `optical`.
pub fn simulate(optical: &OpticalImage, config: &SimConfig) -> Result<TransportResult> {
    let voxels = build_voxels(optical, None)?;
    run(optical, &voxels, config, false)
}

/// Simulates the absorbed energy and, in the same pass, its derivative along
/// `direction` (perturbations of μ_a and μ_s′). The energy is bit-identical
/// to [`simulate`] under the same configuration.
pub fn simulate_with_jvp(
    optical: &OpticalImage,
    direction: &DirectionPair,
    config: &SimConfig,
) -> Result<TransportResult> {
    if direction.grid() != optical.grid() {
        return Err(Error::GridMismatch("optical image", "direction"));
    }
    let voxels = build_voxels(optical, Some(direction))?;
    run(optical, &voxels, config, true)
}

fn build_voxels(optical: &OpticalImage, direction: Option<&DirectionPair>) -> Result<Vec<Voxel>> {
    let mu_s = optical.mu_s();
    let v_s = match direction {
        Some(d) => direction_to_full_scattering(d.v_s_prime(), optical.g())?,
        None => vec![0.0; mu_s.len()],
    };
    let voxels = (0..mu_s.len())
        .map(|i| {
            let mu_a = optical.mu_a()[i];
            let v_a = direction.map_or(0.0, |d| d.v_a()[i]);
            let mu_t = mu_a + mu_s[i];
            if !mu_t.is_finite() {
                return Err(Error::NonFinite("attenuation coefficient"));
            }
            Ok(Voxel {
                mu_a,
                mu_s: mu_s[i],
                mu_t,
                g: optical.g()[i],
                v_a,
                v_s: v_s[i],
                v_t: v_a + v_s[i],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(voxels)
}

fn run(optical: &OpticalImage, voxels: &[Voxel], config: &SimConfig, with_jvp: bool) -> Result<TransportResult> {
    let grid = *optical.grid();
    config.validate(&grid)?;
    let tracer = Tracer {
        grid,
        voxels,
        config,
        entry: config.source.entry_interval(&grid),
        entry_direction: config.source.direction(),
    };

    let total = config.photon_count;
    let partitions = (config.thread_partitions as u64).min(total);
    let base = ChaCha8Rng::seed_from_u64(config.seed);

    // Each photon owns the ChaCha stream named by its global index, so a
    // history never depends on its neighbours or on the partitioning.
    let tallies: Vec<Tally> = (0..partitions)
        .into_par_iter()
        .map(|p| {
            let start = p * total / partitions;
            let end = (p + 1) * total / partitions;
            let mut tally = Tally::new(grid.len(), with_jvp);
            for photon in start..end {
                let mut rng = base.clone();
                rng.set_stream(photon);
                tracer.trace(&mut rng, &mut tally);
            }
            tally
        })
        .collect();

    // Merge in partition order for bit-reproducibility.
    let n = total as f64;
    let mut energy = vec![0.0; grid.len()];
    let mut jvp = vec![0.0; if with_jvp { grid.len() } else { 0 }];
    let mut escaped = 0.0;
    let mut stats = TransportStats::default();
    for t in &tallies {
        for (acc, v) in energy.iter_mut().zip(&t.energy) {
            *acc += v;
        }
        for (acc, v) in jvp.iter_mut().zip(&t.jvp) {
            *acc += v;
        }
        escaped += t.escaped;
        stats.photons += t.photons;
        stats.collisions += t.collisions;
        stats.capped += t.capped;
        stats.roulette_terminated += t.roulette_terminated;
    }
    energy.iter_mut().for_each(|v| *v /= n);
    jvp.iter_mut().for_each(|v| *v /= n);

    let energy_stderr = batch_stderr(&tallies, &energy, total, |t| &t.energy)
        .map(|se| ScalarField::new(grid, FieldKind::Energy, se))
        .transpose()?;
    let jvp_stderr = if with_jvp {
        batch_stderr(&tallies, &jvp, total, |t| &t.jvp)
            .map(|se| ScalarField::new(grid, FieldKind::Energy, se))
            .transpose()?
    } else {
        None
    };

    Ok(TransportResult {
        energy: ScalarField::new(grid, FieldKind::Energy, energy)?,
        energy_jvp: if with_jvp {
            Some(ScalarField::new(grid, FieldKind::Derivative, jvp)?)
        } else {
            None
        },
        escaped_fraction: escaped / n,
        energy_stderr,
        jvp_stderr,
        stats,
    })
}

/// Batch-means standard error with unequal batch sizes.
fn batch_stderr(
    tallies: &[Tally],
    mean: &[f64],
    total: u64,
    select: impl Fn(&Tally) -> &Vec<f64>,
) -> Option<Vec<f64>> {
    if tallies.len() < 2 {
        return None;
    }
    let dof = (tallies.len() - 1) as f64;
    let n = total as f64;
    let mut var = vec![0.0; mean.len()];
    for t in tallies {
        let np = t.photons as f64;
        for ((acc, sum), m) in var.iter_mut().zip(select(t)).zip(mean) {
            let d = sum / np - m;
            *acc += np * d * d;
        }
    }
    Some(var.into_iter().map(|v| (v / dof / n).sqrt()).collect())
}
