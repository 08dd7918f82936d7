//! `.dlfd` files: named scalar arrays on one grid, used for simulation
//! outputs and surrogate predictions.
//!
//! Same framing as `.dlss`; the header carries `grid`, the array
//! directory, `payload_sha256` and a free-form string map `meta`.
//! Predictions use the array names `E` and `dE`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::container::{self, ArrayEntry};
use crate::error::{Error, Result};
use crate::grid::{FieldKind, GridSpec, ScalarField};
use crate::scaling::Prediction;

pub const FIELDS_MAGIC: &[u8; 4] = b"DLFD";
pub const FIELDS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FieldsHeader {
    grid: GridSpec,
    arrays: Vec<ArrayEntry>,
    payload_sha256: String,
    #[serde(default)]
    meta: BTreeMap<String, String>,
}

/// Named arrays sharing a grid, in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldBundle {
    pub grid: GridSpec,
    pub arrays: Vec<(String, Vec<f64>)>,
    pub meta: BTreeMap<String, String>,
}

impl FieldBundle {
    pub fn new(grid: GridSpec) -> Self {
        FieldBundle {
            grid,
            arrays: Vec::new(),
            meta: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, values: Vec<f64>) -> Result<Self> {
        self.grid.check_len("bundle array", values.len())?;
        if self.get(name).is_some() {
            return Err(Error::InvalidConfig(format!("duplicate array name '{name}'")));
        }
        self.arrays.push((name.to_string(), values));
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.arrays.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn field(&self, name: &str, kind: FieldKind) -> Result<ScalarField> {
        let values = self
            .get(name)
            .ok_or_else(|| Error::InvalidConfig(format!("array '{name}' not present")))?;
        ScalarField::new(self.grid, kind, values.to_vec())
    }

    /// Reads a prediction (`E`, `dE`). Predicted energy may be negative.
    pub fn to_prediction(&self) -> Result<Prediction> {
        Ok(Prediction {
            energy: self.field("E", FieldKind::Auxiliary)?,
            energy_jvp: self.field("dE", FieldKind::Derivative)?,
        })
    }

    pub fn from_prediction(p: &Prediction) -> Result<Self> {
        FieldBundle::new(*p.energy.grid())
            .with("E", p.energy.values().to_vec())?
            .with("dE", p.energy_jvp.values().to_vec())
    }
}

pub fn encode_fields(bundle: &FieldBundle) -> Result<Vec<u8>> {
    let arrays: Vec<(&str, &[f64])> = bundle.arrays.iter().map(|(n, v)| (n.as_str(), v.as_slice())).collect();
    let (entries, payload) = container::encode_payload(&bundle.grid, &arrays)?;
    let header = FieldsHeader {
        grid: bundle.grid,
        arrays: entries,
        payload_sha256: container::sha256_hex(&payload),
        meta: bundle.meta.clone(),
    };
    let header = serde_json::to_vec(&header).expect("header serializes");
    Ok(container::frame(FIELDS_MAGIC, FIELDS_VERSION, &header, &payload))
}

pub fn decode_fields(path: &Path, bytes: &[u8]) -> Result<FieldBundle> {
    let (_version, header, payload) = container::unframe(path, bytes, FIELDS_MAGIC, FIELDS_VERSION)?;
    let header: FieldsHeader = container::parse_header(path, header)?;
    let values = container::decode_payload(path, &header.grid, &header.arrays, None, payload, &header.payload_sha256)?;
    Ok(FieldBundle {
        grid: header.grid,
        arrays: header.arrays.into_iter().map(|e| e.name).zip(values).collect(),
        meta: header.meta,
    })
}

pub fn write_fields(path: &Path, bundle: &FieldBundle) -> Result<()> {
    container::write_file(path, &encode_fields(bundle)?)
}

pub fn read_fields(path: &Path) -> Result<FieldBundle> {
    decode_fields(path, &container::read_file(path)?)
}
