//! Shared data model: grids, per-pixel optical coefficients, scalar fields,
//! perturbation directions and training samples.
//!
//! All lengths are in cm and all coefficients in cm⁻¹. Fields are stored
//! row-major with depth as the slow axis: pixel `(ix, iz)` lives at
//! `iz * nx + ix`, and `iz = 0` is the top face where light enters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pixel grid of the imaging plane plus the out-of-plane extrusion used by
/// the volumetric transport.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Lateral pixel count.
    pub nx: usize,
    /// Depth pixel count.
    pub nz: usize,
    /// Lateral spacing, cm.
    pub dx: f64,
    /// Depth spacing, cm.
    pub dz: f64,
    /// Voxel count along the out-of-plane axis.
    pub extrusion_ny: usize,
    /// Out-of-plane spacing, cm.
    pub dy: f64,
}

impl Default for GridSpec {
    /// 256 × 256 pixels at 150 µm (3.84 cm square), extruded 3.84 cm.
    fn default() -> Self {
        GridSpec {
            nx: 256,
            nz: 256,
            dx: 0.015,
            dz: 0.015,
            extrusion_ny: 256,
            dy: 0.015,
        }
    }
}

impl GridSpec {
    pub fn new(nx: usize, nz: usize, dx: f64, dz: f64, extrusion_ny: usize, dy: f64) -> Result<Self> {
        let grid = GridSpec {
            nx,
            nz,
            dx,
            dz,
            extrusion_ny,
            dy,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Square `n × n` grid with isotropic spacing, extruded by `n` voxels.
    pub fn square(n: usize, spacing: f64) -> Result<Self> {
        Self::new(n, n, spacing, spacing, n, spacing)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.nz == 0 || self.extrusion_ny == 0 {
            return Err(Error::InvalidGrid(format!(
                "pixel counts must be >= 1 (nx={}, nz={}, ny={})",
                self.nx, self.nz, self.extrusion_ny
            )));
        }
        for (name, v) in [("dx", self.dx), ("dz", self.dz), ("dy", self.dy)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Number of in-plane pixels.
    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.nz
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, ix: usize, iz: usize) -> usize {
        iz * self.nx + ix
    }

    /// Lateral extent, cm.
    pub fn width(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    /// Depth extent, cm.
    pub fn depth(&self) -> f64 {
        self.nz as f64 * self.dz
    }

    /// Out-of-plane extent, cm.
    pub fn thickness(&self) -> f64 {
        self.extrusion_ny as f64 * self.dy
    }

    /// Whether the grid reaches `depth_cm` of tissue below its top face.
    pub fn covers_depth(&self, depth_cm: f64) -> bool {
        self.depth() >= depth_cm
    }

    pub(crate) fn check_len(&self, what: &'static str, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::ShapeMismatch {
                what,
                expected: self.len(),
                found: len,
            });
        }
        Ok(())
    }
}

/// Physical quantity carried by a [`ScalarField`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// Absorbed energy as a fraction of the launched pulse energy per pixel.
    Energy,
    /// Fluence in the same normalization as `Energy` divided by μ_a (cm).
    Fluence,
    /// Directional derivative of an energy field; either sign.
    Derivative,
    /// Depth of the pixel's top edge below the grid surface, cm.
    Depth,
    /// Dimensionless signed auxiliary field (random fields, latents).
    Auxiliary,
}

impl FieldKind {
    fn nonnegative(self) -> bool {
        matches!(self, FieldKind::Energy | FieldKind::Fluence | FieldKind::Depth)
    }
}

/// One physical quantity on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    kind: FieldKind,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, kind: FieldKind, values: Vec<f64>) -> Result<Self> {
        grid.check_len("scalar field", values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scalar field"));
        }
        if kind.nonnegative() {
            if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| **v < 0.0) {
                return Err(Error::NegativeCoefficient {
                    name: "field value",
                    index,
                    value,
                });
            }
        }
        Ok(ScalarField { grid, kind, values })
    }

    pub fn zeros(grid: GridSpec, kind: FieldKind) -> Self {
        ScalarField {
            grid,
            kind,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, ix: usize, iz: usize) -> f64 {
        self.values[self.grid.index(ix, iz)]
    }

    /// Sum over all pixels.
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Largest absolute value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sum over the lateral axis for each depth row.
    pub fn row_sums(&self) -> Vec<f64> {
        self.values.chunks(self.grid.nx).map(|row| row.iter().sum()).collect()
    }
}

/// Per-pixel absorption, reduced scattering and anisotropy.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalImage {
    grid: GridSpec,
    /// Absorption coefficient μ_a, cm⁻¹.
    mu_a: Vec<f64>,
    /// Reduced scattering coefficient μ_s′ = μ_s (1 − g), cm⁻¹.
    mu_s_prime: Vec<f64>,
    /// Scattering anisotropy, in [0, 1).
    g: Vec<f64>,
}

impl OpticalImage {
    pub fn new(grid: GridSpec, mu_a: Vec<f64>, mu_s_prime: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        grid.check_len("mu_a", mu_a.len())?;
        grid.check_len("mu_s_prime", mu_s_prime.len())?;
        grid.check_len("g", g.len())?;
        check_nonnegative("mu_a", &mu_a)?;
        check_nonnegative("mu_s_prime", &mu_s_prime)?;
        check_anisotropy(&g)?;
        Ok(OpticalImage {
            grid,
            mu_a,
            mu_s_prime,
            g,
        })
    }

    pub fn homogeneous(grid: GridSpec, mu_a: f64, mu_s_prime: f64, g: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![mu_a; n], vec![mu_s_prime; n], vec![g; n])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn mu_a(&self) -> &[f64] {
        &self.mu_a
    }

    pub fn mu_s_prime(&self) -> &[f64] {
        &self.mu_s_prime
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// Scattering coefficient μ_s, cm⁻¹.
    pub fn mu_s(&self) -> Vec<f64> {
        // Anisotropy was validated on construction.
        self.mu_s_prime
            .iter()
            .zip(&self.g)
            .map(|(s, g)| s / (1.0 - g))
            .collect()
    }

    /// `μ + ε·v` for both coefficient fields; anisotropy is unchanged.
    pub fn perturbed(&self, direction: &DirectionPair, epsilon: f64) -> Result<Self> {
        if direction.grid != self.grid {
            return Err(Error::GridMismatch("optical image", "direction"));
        }
        let shift = |base: &[f64], dir: &[f64]| -> Vec<f64> {
            base.iter().zip(dir).map(|(b, d)| b + epsilon * d).collect()
        };
        Self::new(
            self.grid,
            shift(&self.mu_a, &direction.v_a),
            shift(&self.mu_s_prime, &direction.v_s_prime),
            self.g.clone(),
        )
    }
}

fn check_nonnegative(name: &'static str, values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite(name));
        }
        if value < 0.0 {
            return Err(Error::NegativeCoefficient { name, index, value });
        }
    }
    Ok(())
}

fn check_anisotropy(g: &[f64]) -> Result<()> {
    match g.iter().position(|&g| !(0.0..1.0).contains(&g)) {
        Some(index) => Err(Error::InvalidAnisotropy { index, g: g[index] }),
        None => Ok(()),
    }
}

fn divide_by_one_minus_g(values: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    if values.len() != g.len() {
        return Err(Error::ShapeMismatch {
            what: "anisotropy",
            expected: values.len(),
            found: g.len(),
        });
    }
    check_anisotropy(g)?;
    Ok(values.iter().zip(g).map(|(v, g)| v / (1.0 - g)).collect())
}

/// μ_s = μ_s′ / (1 − g), elementwise.
pub fn reduced_to_full_scattering(mu_s_prime: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    check_nonnegative("mu_s_prime", mu_s_prime)?;
    divide_by_one_minus_g(mu_s_prime, g)
}

/// v_s = v_s′ / (1 − g), so a derivative taken along v_s equals the derivative
/// with respect to μ_s′ along v_s′.
pub fn direction_to_full_scattering(v_s_prime: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    if v_s_prime.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("v_s_prime"));
    }
    divide_by_one_minus_g(v_s_prime, g)
}

/// Depth of each pixel's top edge, `iz · dz`, constant along x.
pub fn depth_channel(grid: &GridSpec) -> ScalarField {
    let values = (0..grid.nz)
        .flat_map(|iz| std::iter::repeat_n(iz as f64 * grid.dz, grid.nx))
        .collect();
    ScalarField {
        grid: *grid,
        kind: FieldKind::Depth,
        values,
    }
}

/// Per-pixel perturbation of (μ_a, μ_s′) along which derivatives are taken.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionPair {
    grid: GridSpec,
    v_a: Vec<f64>,
    v_s_prime: Vec<f64>,
}

impl DirectionPair {
    pub fn new(grid: GridSpec, v_a: Vec<f64>, v_s_prime: Vec<f64>) -> Result<Self> {
        grid.check_len("v_a", v_a.len())?;
        grid.check_len("v_s_prime", v_s_prime.len())?;
        if v_a.iter().chain(&v_s_prime).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("direction pair"));
        }
        Ok(DirectionPair {
            grid,
            v_a,
            v_s_prime,
        })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        DirectionPair {
            grid,
            v_a: vec![0.0; grid.len()],
            v_s_prime: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn v_a(&self) -> &[f64] {
        &self.v_a
    }

    pub fn v_s_prime(&self) -> &[f64] {
        &self.v_s_prime
    }

    pub fn is_zero(&self) -> bool {
        self.v_a.iter().chain(&self.v_s_prime).all(|&v| v == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        DirectionPair {
            grid: self.grid,
            v_a: self.v_a.iter().map(|v| v * factor).collect(),
            v_s_prime: self.v_s_prime.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn sum(&self, other: &DirectionPair) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("direction", "direction"));
        }
        let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        Ok(DirectionPair {
            grid: self.grid,
            v_a: add(&self.v_a, &other.v_a),
            v_s_prime: add(&self.v_s_prime, &other.v_s_prime),
        })
    }
}

/// Which generator pairing produced a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GeneratorId {
    /// Tissue-mimicking phantom, tissue-mimicking direction.
    #[serde(rename = "ID1")]
    Id1,
    /// Tissue-mimicking phantom, generic direction.
    #[serde(rename = "ID2")]
    Id2,
    /// Generic phantom, generic direction.
    #[serde(rename = "OOD")]
    Ood,
}

impl GeneratorId {
    pub const ALL: [GeneratorId; 3] = [GeneratorId::Id1, GeneratorId::Id2, GeneratorId::Ood];

    /// Lower-case tag used in file names and on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            GeneratorId::Id1 => "id1",
            GeneratorId::Id2 => "id2",
            GeneratorId::Ood => "ood",
        }
    }
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorId::Id1 => "ID1",
            GeneratorId::Id2 => "ID2",
            GeneratorId::Ood => "OOD",
        })
    }
}

impl FromStr for GeneratorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "id1" => Ok(GeneratorId::Id1),
            "id2" => Ok(GeneratorId::Id2),
            "ood" => Ok(GeneratorId::Ood),
            other => Err(Error::InvalidConfig(format!(
                "unknown generator '{other}' (expected id1, id2 or ood)"
            ))),
        }
    }
}

/// One training record: inputs, simulated energy, direction and the
/// energy's directional derivative along it.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolevSample {
    pub optical: OpticalImage,
    pub energy: ScalarField,
    pub direction: DirectionPair,
    pub energy_jvp: ScalarField,
    pub generator_id: GeneratorId,
    pub seed: u64,
    pub photon_count: u64,
}

impl SobolevSample {
    pub fn new(
        optical: OpticalImage,
        energy: ScalarField,
        direction: DirectionPair,
        energy_jvp: ScalarField,
        generator_id: GeneratorId,
        seed: u64,
        photon_count: u64,
    ) -> Result<Self> {
        let grid = optical.grid;
        if energy.grid != grid {
            return Err(Error::GridMismatch("optical image", "energy"));
        }
        if direction.grid != grid {
            return Err(Error::GridMismatch("optical image", "direction"));
        }
        if energy_jvp.grid != grid {
            return Err(Error::GridMismatch("optical image", "energy derivative"));
        }
        Ok(SobolevSample {
            optical,
            energy,
            direction,
            energy_jvp,
            generator_id,
            seed,
            photon_count,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.optical.grid()
    }
}
