//! Binary state snapshots.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic    b"NSKC"
//! version  u32
//! hlen     u64       length of the JSON header in bytes
//! header   [u8; hlen] UTF-8 JSON: grid, params, time, field table
//! payload  per field in table order, `len` pairs of f64 (re, im), LE
//! ```
//!
//! The time and every float in the header are also stored as raw bit
//! patterns so reading back is exact.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{NskParams, NskState};
use crate::spectral::{Parity, ScalarField, SlabGrid, VectorField};

pub const MAGIC: &[u8; 4] = b"NSKC";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: not a checkpoint file")]
    BadMagic { path: PathBuf },
    #[error("{path}: unsupported format version {version}")]
    Version { path: PathBuf, version: u32 },
    #[error("{path}: malformed header: {message}")]
    Header { path: PathBuf, message: String },
    #[error("{path}: payload truncated")]
    Truncated { path: PathBuf },
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldEntry {
    name: String,
    parity: Parity,
    len: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    grid: SlabGrid,
    params: NskParams,
    time: f64,
    time_bits: u64,
    fields: Vec<FieldEntry>,
}

const NAMES: [&str; 5] = ["q", "u1", "u2", "u3", "theta"];

fn fields(state: &NskState) -> [&ScalarField; 5] {
    [&state.q, &state.u.c[0], &state.u.c[1], &state.u.c[2], &state.theta]
}

/// Serialises a state into the checkpoint byte layout.
pub fn encode(state: &NskState, params: &NskParams) -> Vec<u8> {
    let fs = fields(state);
    let header = Header {
        grid: *state.grid(),
        params: *params,
        time: state.time,
        time_bits: state.time.to_bits(),
        fields: NAMES
            .iter()
            .zip(fs)
            .map(|(n, f)| FieldEntry { name: n.to_string(), parity: f.parity(), len: f.coeffs().len() })
            .collect(),
    };
    let json = serde_json::to_vec(&header).expect("header serialises");
    let mut out = Vec::with_capacity(16 + json.len() + fs.iter().map(|f| f.coeffs().len() * 16).sum::<usize>());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for f in fs {
        for c in f.coeffs() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    out
}

/// Inverse of [`encode`]; `path` is only used in error messages.
pub fn decode(bytes: &[u8], path: &Path) -> Result<(NskState, NskParams), CheckpointError> {
    let p = || path.to_path_buf();
    let header_err = |m: String| CheckpointError::Header { path: p(), message: m };
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(CheckpointError::BadMagic { path: p() });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(CheckpointError::Version { path: p(), version });
    }
    let hlen = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let body = bytes.get(16..16 + hlen).ok_or(CheckpointError::Truncated { path: p() })?;
    let header: Header = serde_json::from_slice(body).map_err(|e| header_err(e.to_string()))?;
    let grid = SlabGrid::new(header.grid.n_h, header.grid.n_v, header.grid.l_h, header.grid.dealias_fraction)
        .map_err(|e| header_err(e.to_string()))?;
    header.params.validate().map_err(|e| header_err(e.to_string()))?;
    if header.fields.len() != NAMES.len() || header.fields.iter().zip(NAMES).any(|(f, n)| f.name != n) {
        return Err(header_err("unexpected field table".into()));
    }
    let mut cursor = &bytes[16 + hlen..];
    let mut out = Vec::new();
    for entry in &header.fields {
        if entry.len != grid.spectral_len() {
            return Err(header_err(format!("field {} has length {}", entry.name, entry.len)));
        }
        let mut coeffs = Vec::with_capacity(entry.len);
        let mut buf = [0u8; 16];
        for _ in 0..entry.len {
            cursor.read_exact(&mut buf).map_err(|_| CheckpointError::Truncated { path: p() })?;
            let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
            coeffs.push(Complex64::new(re, im));
        }
        out.push(ScalarField::from_coeffs(grid, entry.parity, coeffs).map_err(|e| header_err(e.to_string()))?);
    }
    if !cursor.is_empty() {
        return Err(header_err("trailing bytes after payload".into()));
    }
    let [q, u1, u2, u3, theta]: [ScalarField; 5] = out.try_into().expect("five fields");
    let state = NskState::new(q, VectorField::new(u1, u2, u3), theta, f64::from_bits(header.time_bits))
        .map_err(|e| header_err(e.to_string()))?;
    Ok((state, header.params))
}

pub fn write(path: &Path, state: &NskState, params: &NskParams) -> Result<(), CheckpointError> {
    let io = |source| CheckpointError::Io { path: path.to_path_buf(), source };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(&encode(state, params)).map_err(io)?;
    Ok(())
}

pub fn read(path: &Path) -> Result<(NskState, NskParams), CheckpointError> {
    let bytes = fs::read(path).map_err(|source| CheckpointError::Io { path: path.to_path_buf(), source })?;
    decode(&bytes, path)
}
