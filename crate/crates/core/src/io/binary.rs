//! Packed little-endian table format for large sweeps.
//!
//! Layout: 8-byte magic, `u32` version, `u8` kind (0 pattern, 1 sensing matrix), `u8` port
//! (0 when absent), two padding bytes, then `f64` ref distance, `f64` f_min, `f64` f_max,
//! `u64` freq count, `u64` angle count, and `M * N` `(re, im)` `f64` pairs in row-major order.

use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use super::table::{PatternFile, TableKind};
use crate::error::{Error, Result};
use crate::forward::PortId;
use crate::grid::{AngleGrid, FrequencyGrid};

pub const BINARY_MAGIC: &[u8; 8] = b"CAOATBL\0";
pub const BINARY_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 4 + 8 * 5;

pub fn encode_table(t: &PatternFile) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * t.values.len());
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&BINARY_VERSION.to_le_bytes());
    out.push(match t.kind {
        TableKind::Pattern => 0,
        TableKind::SensingMatrix => 1,
    });
    out.push(t.port_id.map_or(0, PortId::number));
    out.extend_from_slice(&[0, 0]);
    for v in [t.ref_distance_m, t.freqs.f_min(), t.freqs.f_max()] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(t.freqs.len() as u64).to_le_bytes());
    out.extend_from_slice(&(t.angles.len() as u64).to_le_bytes());
    for z in t.values.iter() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

fn u64_at(bytes: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode_table(bytes: &[u8]) -> Result<PatternFile> {
    let bad = |msg: String| Error::parse(None, msg);
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("binary table truncated: {} bytes", bytes.len())));
    }
    if &bytes[..8] != BINARY_MAGIC {
        return Err(bad("not a conformal-aoa binary table (bad magic)".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != BINARY_VERSION {
        return Err(bad(format!("unsupported binary version {version}")));
    }
    let kind = match bytes[12] {
        0 => TableKind::Pattern,
        1 => TableKind::SensingMatrix,
        k => return Err(bad(format!("unknown table kind byte {k}"))),
    };
    let port_id = match bytes[13] {
        0 => None,
        p => Some(PortId::try_from(p).map_err(|e| bad(e.to_string()))?),
    };
    let ref_distance_m = f64_at(bytes, 16);
    let (f_min, f_max) = (f64_at(bytes, 24), f64_at(bytes, 32));
    let (m, n) = (u64_at(bytes, 40), u64_at(bytes, 48));
    let cells = m
        .checked_mul(n)
        .and_then(|c| c.checked_mul(16))
        .and_then(|b| usize::try_from(b).ok())
        .ok_or_else(|| bad(format!("implausible dimensions {m} x {n}")))?;
    if bytes.len() != HEADER_LEN + cells {
        return Err(bad(format!(
            "expected {} payload bytes for {m} x {n}, found {}",
            cells,
            bytes.len() - HEADER_LEN
        )));
    }
    let freqs = FrequencyGrid::new(f_min, f_max, m as usize).map_err(|e| bad(e.to_string()))?;
    let angles = AngleGrid::new(n as usize).map_err(|e| bad(e.to_string()))?;
    let payload = &bytes[HEADER_LEN..];
    let data: Vec<Complex64> = payload
        .chunks_exact(16)
        .map(|c| Complex64::new(f64_at(c, 0), f64_at(c, 8)))
        .collect();
    let values = Array2::from_shape_vec((m as usize, n as usize), data)
        .map_err(|e| bad(e.to_string()))?;
    Ok(PatternFile {
        kind,
        port_id,
        ref_distance_m,
        freqs,
        angles,
        values,
    })
}

pub fn save_table_binary(path: &Path, t: &PatternFile) -> Result<()> {
    std::fs::write(path, encode_table(t)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_table_binary(path: &Path) -> Result<PatternFile> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_table(&bytes).map_err(|e| e.with_path(path))
}
