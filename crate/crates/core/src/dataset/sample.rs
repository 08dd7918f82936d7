//! `.dlss` files: one [`SobolevSample`] per file.
//!
//! Seven arrays are stored in fixed order: `mu_a`, `mu_s_prime`, `g`, `E`,
//! `v_a`, `v_s_prime`, `dE`. Values are narrowed to f32 on write, so a
//! sample whose values are already f32-representable round-trips exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::container::{self, ArrayEntry};
use crate::error::{Error, Result};
use crate::grid::{DirectionPair, FieldKind, GeneratorId, GridSpec, OpticalImage, ScalarField, SobolevSample};

pub const SAMPLE_MAGIC: &[u8; 4] = b"DLSS";
/// Newest sample version this build writes and reads. Older versions are
/// read as well; newer ones are rejected.
pub const SAMPLE_VERSION: u32 = 1;
pub const SAMPLE_ARRAYS: [&str; 7] = ["mu_a", "mu_s_prime", "g", "E", "v_a", "v_s_prime", "dE"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleHeader {
    pub grid: GridSpec,
    pub generator_id: GeneratorId,
    pub seed: u64,
    pub photon_count: u64,
    pub arrays: Vec<ArrayEntry>,
    /// SHA-256 of the payload, lowercase hex.
    pub payload_sha256: String,
}

/// Serializes a sample to bytes.
pub fn encode_sample(sample: &SobolevSample) -> Result<Vec<u8>> {
    let grid = *sample.grid();
    let (entries, payload) = container::encode_payload(
        &grid,
        &[
            ("mu_a", sample.optical.mu_a()),
            ("mu_s_prime", sample.optical.mu_s_prime()),
            ("g", sample.optical.g()),
            ("E", sample.energy.values()),
            ("v_a", sample.direction.v_a()),
            ("v_s_prime", sample.direction.v_s_prime()),
            ("dE", sample.energy_jvp.values()),
        ],
    )?;
    let header = SampleHeader {
        grid,
        generator_id: sample.generator_id,
        seed: sample.seed,
        photon_count: sample.photon_count,
        arrays: entries,
        payload_sha256: container::sha256_hex(&payload),
    };
    let header = serde_json::to_vec(&header).expect("header serializes");
    Ok(container::frame(SAMPLE_MAGIC, SAMPLE_VERSION, &header, &payload))
}

/// Parses sample bytes; `path` only labels errors.
pub fn decode_sample(path: &Path, bytes: &[u8]) -> Result<SobolevSample> {
    let (_version, header, payload) = container::unframe(path, bytes, SAMPLE_MAGIC, SAMPLE_VERSION)?;
    let header: SampleHeader = container::parse_header(path, header)?;
    let grid = header.grid;
    let mut arrays = container::decode_payload(
        path,
        &grid,
        &header.arrays,
        Some(&SAMPLE_ARRAYS),
        payload,
        &header.payload_sha256,
    )?
    .into_iter();
    let mut next = || arrays.next().expect("seven arrays checked");
    let (mu_a, mu_s_prime, g) = (next(), next(), next());
    let energy = next();
    let (v_a, v_s_prime) = (next(), next());
    let jvp = next();
    let invalid = |e: Error| Error::format(path, e.to_string());
    SobolevSample::new(
        OpticalImage::new(grid, mu_a, mu_s_prime, g).map_err(invalid)?,
        ScalarField::new(grid, FieldKind::Energy, energy).map_err(invalid)?,
        DirectionPair::new(grid, v_a, v_s_prime).map_err(invalid)?,
        ScalarField::new(grid, FieldKind::Derivative, jvp).map_err(invalid)?,
        header.generator_id,
        header.seed,
        header.photon_count,
    )
}

pub fn write_sample(path: &Path, sample: &SobolevSample) -> Result<()> {
    container::write_file(path, &encode_sample(sample)?)
}

pub fn read_sample(path: &Path) -> Result<SobolevSample> {
    decode_sample(path, &container::read_file(path)?)
}

/// The sample as it reads back from disk: every array narrowed to f32.
pub fn quantize_sample(sample: &SobolevSample) -> Result<SobolevSample> {
    decode_sample(Path::new("<memory>"), &encode_sample(sample)?)
}
