//! Shared framing of the binary file formats:
//!
//! ```text
//! magic[4] | version: u32 LE | header_len: u32 LE | header (UTF-8 JSON) | payload
//! ```
//!
//! The payload is a sequence of little-endian f32 arrays, each described by
//! a directory entry in the header, laid out back to back in directory order.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

const PREAMBLE: usize = 12;

/// Directory entry of one stored array. `offset` is in bytes from the start
/// of the payload; `shape` is `[nz, nx]`, row-major with x fastest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayEntry {
    pub name: String,
    pub offset: u64,
    pub shape: [usize; 2],
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Converts arrays to the f32 payload; rejects values that are not finite
/// in single precision.
pub(crate) fn encode_payload(grid: &GridSpec, arrays: &[(&str, &[f64])]) -> Result<(Vec<ArrayEntry>, Vec<u8>)> {
    let mut entries = Vec::with_capacity(arrays.len());
    let mut payload = Vec::with_capacity(arrays.len() * grid.len() * 4);
    for &(name, values) in arrays {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                what: "stored array",
                expected: grid.len(),
                found: values.len(),
            });
        }
        entries.push(ArrayEntry {
            name: name.to_string(),
            offset: payload.len() as u64,
            shape: [grid.nz, grid.nx],
        });
        for &v in values {
            let f = v as f32;
            if !f.is_finite() {
                return Err(Error::NonFinite("array written to disk"));
            }
            payload.extend_from_slice(&f.to_le_bytes());
        }
    }
    Ok((entries, payload))
}

pub(crate) fn frame(magic: &[u8; 4], version: u32, header: &[u8], payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(PREAMBLE + header.len() + payload.len());
    out.extend_from_slice(magic);
    out.extend_from_slice(&version.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(header);
    out.extend_from_slice(payload);
    out
}

/// Splits a file into version, header and payload.
pub(crate) fn unframe<'a>(
    path: &Path,
    bytes: &'a [u8],
    magic: &[u8; 4],
    supported: u32,
) -> Result<(u32, &'a [u8], &'a [u8])> {
    if bytes.len() < PREAMBLE {
        return Err(Error::format(path, format!("truncated: {} bytes, preamble needs {PREAMBLE}", bytes.len())));
    }
    if &bytes[0..4] != magic {
        return Err(Error::format(
            path,
            format!("bad magic {:?}, expected {:?}", &bytes[0..4], std::str::from_utf8(magic).unwrap_or("?")),
        ));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version == 0 || version > supported {
        return Err(Error::UnsupportedVersion {
            path: path.to_path_buf(),
            found: version,
            supported,
        });
    }
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let Some(header) = bytes.get(PREAMBLE..PREAMBLE + header_len) else {
        return Err(Error::format(
            path,
            format!("truncated: header declares {header_len} bytes, file has {}", bytes.len() - PREAMBLE),
        ));
    };
    Ok((version, header, &bytes[PREAMBLE + header_len..]))
}

pub(crate) fn parse_header<T: for<'de> Deserialize<'de>>(path: &Path, header: &[u8]) -> Result<T> {
    serde_json::from_slice(header).map_err(|e| Error::format(path, format!("header: {e}")))
}

/// Checks the directory against the grid, the expected names and the
/// payload, then decodes every array.
pub(crate) fn decode_payload(
    path: &Path,
    grid: &GridSpec,
    entries: &[ArrayEntry],
    expected_names: Option<&[&str]>,
    payload: &[u8],
    checksum: &str,
) -> Result<Vec<Vec<f64>>> {
    grid.validate()?;
    if let Some(names) = expected_names {
        let found: Vec<&str> = entries.iter().map(|e| e.name.as_str()).collect();
        if found != names {
            return Err(Error::format(path, format!("array directory {found:?}, expected {names:?}")));
        }
    }
    let array_bytes = grid.len() * 4;
    let mut offset = 0u64;
    for e in entries {
        if e.shape != [grid.nz, grid.nx] {
            return Err(Error::format(
                path,
                format!("array '{}' has shape {:?}, grid is [{}, {}]", e.name, e.shape, grid.nz, grid.nx),
            ));
        }
        if e.offset != offset {
            return Err(Error::format(path, format!("array '{}' at offset {}, expected {offset}", e.name, e.offset)));
        }
        offset += array_bytes as u64;
    }
    if payload.len() as u64 != offset {
        return Err(Error::format(
            path,
            format!("payload is {} bytes, directory declares {offset}", payload.len()),
        ));
    }
    if sha256_hex(payload) != checksum {
        return Err(Error::format(path, "payload checksum mismatch"));
    }
    Ok(payload
        .chunks_exact(array_bytes)
        .map(|chunk| {
            chunk
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64)
                .collect()
        })
        .collect())
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
