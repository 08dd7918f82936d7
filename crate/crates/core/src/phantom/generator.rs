//! Tissue-mimicking and generic phantom layouts.
//!
//! Both generators first build a latent description of the image: a
//! component label per pixel plus an unbounded latent value per coefficient
//! (a per-sample offset plus Gaussian-random-field texture). Phantoms map
//! latents into each component's coefficient range with a logistic squash;
//! direction pairs reuse the same latents unsquashed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grf::{sample_grf, GrfSpec};
use super::ranges::{ComponentRanges, Interval, TissueRanges};
use crate::error::Result;
use crate::grid::{DirectionPair, GridSpec, OpticalImage};
use crate::seed;

/// Structural component a pixel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Coupling,
    Epidermis,
    Dermis,
    Tissue,
    Vessel,
}

/// Which generator pipeline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionKind {
    /// Layered tissue-mimicking structure.
    TissueMimicking,
    /// Coupling medium over generic tissue.
    Generic,
}

/// Skin position per column and the thickness of the layers below it.
#[derive(Debug, Clone, PartialEq)]
pub struct SkinLine {
    /// Depth of the skin surface for each column, cm.
    pub depth: Vec<f64>,
    /// Epidermis thickness, cm (0 for generic phantoms).
    pub epidermis_thickness: f64,
    /// Dermis thickness, cm (0 if absent).
    pub dermis_thickness: f64,
}

/// A generated optical image with its structural annotations.
#[derive(Debug, Clone)]
pub struct Phantom {
    pub optical: OpticalImage,
    pub components: Vec<Component>,
    pub skin: SkinLine,
}

impl Phantom {
    pub fn count(&self, component: Component) -> usize {
        self.components.iter().filter(|&&c| c == component).count()
    }
}

struct Layout {
    components: Vec<Component>,
    skin: SkinLine,
    latent_a: Vec<f64>,
    latent_s: Vec<f64>,
    range_a: Vec<Interval>,
    range_s: Vec<Interval>,
    g: Vec<f64>,
}

/// One latent block: constant offset plus texture for both coefficients.
struct ComponentLatent {
    ranges: ComponentRanges,
    a: Vec<f64>,
    s: Vec<f64>,
}

impl ComponentLatent {
    fn draw(grid: &GridSpec, ranges: &ComponentRanges, rng: &mut ChaCha8Rng) -> Result<Self> {
        let offset_a = logit(rng.random());
        let offset_s = logit(rng.random());
        let tex_a = sample_grf(grid, &ranges.texture, rng.random())?;
        let tex_s = sample_grf(grid, &ranges.texture, rng.random())?;
        Ok(ComponentLatent {
            ranges: *ranges,
            a: tex_a.values().iter().map(|t| offset_a + t).collect(),
            s: tex_s.values().iter().map(|t| offset_s + t).collect(),
        })
    }
}

fn logit(u: f64) -> f64 {
    let u = u.clamp(1e-12, 1.0 - 1e-12);
    (u / (1.0 - u)).ln()
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Smooth skin curve: a few low-order random harmonics around a random mean
/// depth, kept inside the configured band.
fn skin_curve(grid: &GridSpec, ranges: &TissueRanges, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let depth = grid.depth();
    let band = ranges.skin.depth_fraction;
    let mean = band.lerp(rng.random()) * depth;
    let peak = ranges.skin.undulation_fraction * depth;
    let harmonics: Vec<(f64, f64)> = (1..=3)
        .map(|m| {
            let amp = (2.0 * rng.random::<f64>() - 1.0) / (m * m) as f64;
            let phase = std::f64::consts::TAU * rng.random::<f64>();
            (amp, phase)
        })
        .collect();
    // Harmonic amplitudes sum to at most 1 + 1/4 + 1/9.
    let norm = peak / (1.0 + 0.25 + 1.0 / 9.0);
    let lo = 0.5 * grid.dz;
    let hi = depth - 1.5 * grid.dz;
    (0..grid.nx)
        .map(|ix| {
            let t = (ix as f64 + 0.5) / grid.nx as f64;
            let wave: f64 = harmonics
                .iter()
                .enumerate()
                .map(|(m, (amp, phase))| amp * (std::f64::consts::TAU * (m + 1) as f64 * t + phase).sin())
                .sum();
            (mean + norm * wave).clamp(lo, hi)
        })
        .collect()
}

fn build_layout(grid: &GridSpec, ranges: &TissueRanges, kind: DirectionKind, seed: u64) -> Result<Layout> {
    grid.validate()?;
    ranges.validate()?;
    let mut rng = seed::rng(seed);
    let n = grid.len();
    let skin_depth = skin_curve(grid, ranges, &mut rng);

    let coupling = ComponentLatent::draw(grid, &ranges.coupling, &mut rng)?;
    let (epi_t, derm_t, layers, tissue) = match kind {
        DirectionKind::TissueMimicking => {
            let epi_t = ranges.epidermis_thickness.lerp(rng.random());
            let has_dermis = rng.random::<f64>() < ranges.dermis_probability;
            let derm_t = if has_dermis {
                ranges.dermis_thickness.lerp(rng.random())
            } else {
                0.0
            };
            let epidermis = ComponentLatent::draw(grid, &ranges.epidermis, &mut rng)?;
            let dermis = ComponentLatent::draw(grid, &ranges.dermis, &mut rng)?;
            let tissue = ComponentLatent::draw(grid, &ranges.tissue, &mut rng)?;
            (epi_t, derm_t, Some((epidermis, dermis)), tissue)
        }
        DirectionKind::Generic => {
            let tissue = ComponentLatent::draw(grid, &ranges.generic_tissue, &mut rng)?;
            (0.0, 0.0, None, tissue)
        }
    };

    let mut layout = Layout {
        components: vec![Component::Tissue; n],
        skin: SkinLine {
            depth: skin_depth,
            epidermis_thickness: epi_t,
            dermis_thickness: derm_t,
        },
        latent_a: vec![0.0; n],
        latent_s: vec![0.0; n],
        range_a: vec![Interval::new(0.0, 0.0); n],
        range_s: vec![Interval::new(0.0, 0.0); n],
        g: vec![0.0; n],
    };

    for iz in 0..grid.nz {
        let zc = (iz as f64 + 0.5) * grid.dz;
        for ix in 0..grid.nx {
            let i = grid.index(ix, iz);
            let below = zc - layout.skin.depth[ix];
            // Layers are at least one pixel thick so they survive coarse grids.
            let epi_end = if layers.is_some() { epi_t.max(grid.dz) } else { 0.0 };
            let (component, latent) = if below < 0.0 {
                (Component::Coupling, &coupling)
            } else {
                match &layers {
                    Some((epidermis, _)) if below < epi_end => (Component::Epidermis, epidermis),
                    Some((_, dermis)) if derm_t > 0.0 && below < epi_end + derm_t.max(grid.dz) => {
                        (Component::Dermis, dermis)
                    }
                    _ => (Component::Tissue, &tissue),
                }
            };
            layout.components[i] = component;
            layout.latent_a[i] = latent.a[i];
            layout.latent_s[i] = latent.s[i];
            layout.range_a[i] = latent.ranges.mu_a;
            layout.range_s[i] = latent.ranges.mu_s_prime;
            layout.g[i] = latent.ranges.g;
        }
    }

    if kind == DirectionKind::TissueMimicking {
        place_vessels(grid, ranges, &mut rng, &mut layout)?;
    }
    Ok(layout)
}

/// Elliptical high-absorption inclusions with random-field-perturbed
/// boundaries. Vessels only replace tissue pixels and keep the tissue's
/// scattering.
fn place_vessels(grid: &GridSpec, ranges: &TissueRanges, rng: &mut ChaCha8Rng, layout: &mut Layout) -> Result<()> {
    let v = &ranges.vessel;
    let count = rng.random_range(0..=v.max_count);
    let boundary = GrfSpec {
        correlation_length: 0.5 * v.radius.midpoint(),
        variance: 1.0,
        spectral_exponent: 0.0,
    };
    let top = layout.skin.depth.iter().cloned().fold(f64::INFINITY, f64::min);
    for _ in 0..count {
        let cx = grid.width() * rng.random::<f64>();
        let cz = top + (grid.depth() - top) * rng.random::<f64>();
        let major = v.radius.lerp(rng.random());
        let minor = major * v.aspect.lerp(rng.random());
        let angle = std::f64::consts::PI * rng.random::<f64>();
        let tone = logit(rng.random());
        let rough = sample_grf(grid, &boundary, rng.random())?;
        let texture = sample_grf(grid, &v.texture, rng.random())?;
        let (sin, cos) = angle.sin_cos();
        for iz in 0..grid.nz {
            let z = (iz as f64 + 0.5) * grid.dz - cz;
            for ix in 0..grid.nx {
                let i = grid.index(ix, iz);
                if !matches!(layout.components[i], Component::Tissue | Component::Vessel) {
                    continue;
                }
                let x = (ix as f64 + 0.5) * grid.dx - cx;
                let (u, w) = (cos * x + sin * z, -sin * x + cos * z);
                let rho = (u / major).powi(2) + (w / minor).powi(2);
                if rho <= 1.0 + v.boundary_roughness * rough.values()[i] {
                    layout.components[i] = Component::Vessel;
                    layout.latent_a[i] = tone + texture.values()[i];
                    layout.range_a[i] = v.mu_a;
                }
            }
        }
    }
    Ok(())
}

fn squash(latent: &[f64], ranges: &[Interval]) -> Vec<f64> {
    latent.iter().zip(ranges).map(|(x, r)| r.lerp(logistic(*x))).collect()
}

fn phantom_from_layout(grid: &GridSpec, layout: Layout) -> Result<Phantom> {
    let mu_a = squash(&layout.latent_a, &layout.range_a);
    let mu_s_prime = squash(&layout.latent_s, &layout.range_s);
    Ok(Phantom {
        optical: OpticalImage::new(*grid, mu_a, mu_s_prime, layout.g)?,
        components: layout.components,
        skin: layout.skin,
    })
}

/// Tissue-mimicking phantom: coupling medium, epidermis, optional dermis,
/// textured tissue and vessels. Every coefficient is strictly inside its
/// component's range.
pub fn generate_id_phantom(grid: &GridSpec, ranges: &TissueRanges, seed: u64) -> Result<Phantom> {
    let layout = build_layout(grid, ranges, DirectionKind::TissueMimicking, seed)?;
    phantom_from_layout(grid, layout)
}

/// Generic phantom: the same coupling medium and skin curve over tissue with
/// wide absorption variation and no layers or vessels.
pub fn generate_ood_phantom(grid: &GridSpec, ranges: &TissueRanges, seed: u64) -> Result<Phantom> {
    let layout = build_layout(grid, ranges, DirectionKind::Generic, seed)?;
    phantom_from_layout(grid, layout)
}

/// Direction pair from the generator pipeline of `kind` with the positivity
/// squash replaced by its linearization, so both signs occur.
///
/// Each coefficient's direction is rescaled so its RMS equals
/// `ranges.direction_fraction` times the RMS of the component mid-range
/// values over the image.
pub fn sample_direction(grid: &GridSpec, kind: DirectionKind, ranges: &TissueRanges, seed: u64) -> Result<DirectionPair> {
    let layout = build_layout(grid, ranges, kind, seed)?;
    let linearize = |latent: &[f64], range: &[Interval]| -> Vec<f64> {
        let raw: Vec<f64> = latent.iter().zip(range).map(|(x, r)| 0.25 * r.width() * x).collect();
        let target = ranges.direction_fraction * rms(range.iter().map(Interval::midpoint));
        let current = rms(raw.iter().copied());
        let k = if current > 0.0 { target / current } else { 0.0 };
        raw.into_iter().map(|v| v * k).collect()
    };
    let v_a = linearize(&layout.latent_a, &layout.range_a);
    let v_s = linearize(&layout.latent_s, &layout.range_s);
    DirectionPair::new(*grid, v_a, v_s)
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}
