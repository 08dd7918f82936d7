//! Photon histories on the extruded voxel grid.
//!
//! Flights consume an Exp(1) optical depth while marching across voxel
//! boundaries, so every segment length inside each voxel is exact. The
//! out-of-plane axis only bounds the slab: coefficients are constant along
//! it and tallies are accumulated straight into the in-plane pixel, which
//! is the same as summing the volumetric deposit over y.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::SimConfig;
use super::phase::{deflect, sample_henyey_greenstein};
use crate::grid::GridSpec;

/// Per-voxel coefficients in full-scattering space, plus the direction pair.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Voxel {
    pub mu_a: f64,
    pub mu_s: f64,
    pub mu_t: f64,
    pub g: f64,
    pub v_a: f64,
    pub v_s: f64,
    /// `v_a + v_s`, the perturbation of μ_t.
    pub v_t: f64,
}

/// State of one photon packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonState {
    /// Position in cm; x lateral, y out-of-plane, z depth.
    pub position: [f64; 3],
    /// Unit propagation direction.
    pub direction: [f64; 3],
    /// Packet weight in (0, 1], except right after a roulette boost.
    pub weight: f64,
    /// Running log-sensitivity of the path contracted with the direction pair.
    pub score: f64,
    pub event_count: u64,
}

#[derive(Debug, Clone)]
pub(crate) struct Tally {
    pub energy: Vec<f64>,
    /// Empty when no derivative is requested.
    pub jvp: Vec<f64>,
    pub escaped: f64,
    pub photons: u64,
    pub collisions: u64,
    pub capped: u64,
    pub roulette_terminated: u64,
}

impl Tally {
    pub fn new(len: usize, with_jvp: bool) -> Self {
        Tally {
            energy: vec![0.0; len],
            jvp: if with_jvp { vec![0.0; len] } else { Vec::new() },
            escaped: 0.0,
            photons: 0,
            collisions: 0,
            capped: 0,
            roulette_terminated: 0,
        }
    }
}

pub(crate) struct Tracer<'a> {
    pub grid: GridSpec,
    pub voxels: &'a [Voxel],
    pub config: &'a SimConfig,
    pub entry: (f64, f64),
    pub entry_direction: [f64; 3],
}

enum Flight {
    Collision(usize),
    Escaped,
}

impl Tracer<'_> {
    pub fn launch(&self, rng: &mut ChaCha8Rng) -> (PhotonState, usize) {
        // Always draw, so pencil and strip beams consume the same stream.
        let u: f64 = rng.random();
        let (lo, hi) = self.entry;
        let x = lo + (hi - lo) * u;
        let ix = ((x / self.grid.dx) as usize).min(self.grid.nx - 1);
        let state = PhotonState {
            position: [x, 0.5 * self.grid.thickness(), 0.0],
            direction: self.entry_direction,
            weight: 1.0,
            score: 0.0,
            event_count: 0,
        };
        (state, ix)
    }

    /// Traces one photon to termination, accumulating into `tally`.
    pub fn trace(&self, rng: &mut ChaCha8Rng, tally: &mut Tally) {
        let with_jvp = !tally.jvp.is_empty();
        let (mut p, mut ix) = self.launch(rng);
        let mut iz = 0usize;
        tally.photons += 1;

        loop {
            let tau = -(1.0 - rng.random::<f64>()).ln();
            let idx = match self.fly(&mut p, &mut ix, &mut iz, tau) {
                Flight::Collision(idx) => idx,
                Flight::Escaped => {
                    tally.escaped += p.weight;
                    return;
                }
            };

            // Fixed draw count per collision keeps histories aligned across
            // perturbed runs that share a seed.
            let u_polar: f64 = rng.random();
            let u_azimuth: f64 = rng.random();
            let u_roulette: f64 = rng.random();

            let v = self.voxels[idx];
            let w = p.weight;
            p.event_count += 1;
            tally.collisions += 1;

            let deposit = w * v.mu_a / v.mu_t;
            tally.energy[idx] += deposit;
            if with_jvp {
                tally.jvp[idx] += deposit * p.score + w * v.v_a / v.mu_t;
            }

            p.weight = w * v.mu_s / v.mu_t;
            if p.weight == 0.0 {
                return;
            }
            p.score += v.v_s / v.mu_s;
            p.direction = deflect(p.direction, sample_henyey_greenstein(v.g, (u_polar, u_azimuth)));

            if p.weight < self.config.roulette_threshold {
                if u_roulette < self.config.roulette_survival {
                    p.weight /= self.config.roulette_survival;
                } else {
                    tally.roulette_terminated += 1;
                    return;
                }
            }
            if p.event_count >= self.config.max_events {
                tally.escaped += p.weight;
                tally.capped += 1;
                return;
            }
        }
    }

    /// Marches across voxels until `tau` optical depth is used up or the
    /// photon leaves the grid.
    #[inline]
    fn fly(&self, p: &mut PhotonState, ix: &mut usize, iz: &mut usize, mut tau: f64) -> Flight {
        let GridSpec { nx, nz, dx, dz, .. } = self.grid;
        let thickness = self.grid.thickness();
        let [ux, uy, uz] = p.direction;
        let (inv_x, inv_y, inv_z) = (1.0 / ux, 1.0 / uy, 1.0 / uz);

        loop {
            let idx = *iz * nx + *ix;
            let v = &self.voxels[idx];
            let [x, y, z] = p.position;

            let tx = if ux > 0.0 {
                ((*ix + 1) as f64 * dx - x) * inv_x
            } else if ux < 0.0 {
                (*ix as f64 * dx - x) * inv_x
            } else {
                f64::INFINITY
            };
            let tz = if uz > 0.0 {
                ((*iz + 1) as f64 * dz - z) * inv_z
            } else if uz < 0.0 {
                (*iz as f64 * dz - z) * inv_z
            } else {
                f64::INFINITY
            };
            let ty = if uy > 0.0 {
                (thickness - y) * inv_y
            } else if uy < 0.0 {
                -y * inv_y
            } else {
                f64::INFINITY
            };
            let step = tx.min(tz).min(ty).max(0.0);

            if v.mu_t > 0.0 && tau <= v.mu_t * step {
                let s = tau / v.mu_t;
                p.position = [x + ux * s, y + uy * s, z + uz * s];
                p.score -= v.v_t * s;
                return Flight::Collision(idx);
            }

            // Transparent voxels are crossed ballistically with no score.
            if v.mu_t > 0.0 {
                tau -= v.mu_t * step;
                p.score -= v.v_t * step;
            }
            p.position = [x + ux * step, y + uy * step, z + uz * step];

            if ty <= step {
                return Flight::Escaped;
            }
            if tx <= step {
                if ux > 0.0 {
                    *ix += 1;
                    if *ix == nx {
                        return Flight::Escaped;
                    }
                    p.position[0] = *ix as f64 * dx;
                } else {
                    p.position[0] = *ix as f64 * dx;
                    if *ix == 0 {
                        return Flight::Escaped;
                    }
                    *ix -= 1;
                }
            }
            if tz <= step {
                if uz > 0.0 {
                    *iz += 1;
                    if *iz == nz {
                        return Flight::Escaped;
                    }
                    p.position[2] = *iz as f64 * dz;
                } else {
                    p.position[2] = *iz as f64 * dz;
                    if *iz == 0 {
                        return Flight::Escaped;
                    }
                    *iz -= 1;
                }
            }
        }
    }
}
