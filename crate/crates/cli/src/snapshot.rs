//! Field snapshots: 16-bit binary PGM plus a JSON sidecar.
//!
//! Rows are written from the low-y row upwards, `x` increasing within a row.
//! Each value maps linearly from `[min, max]` to `[0, 65535]`; the sidecar
//! stores `min` and `max` so `min + code / 65535 * (max - min)` recovers the
//! field to within half a quantization step.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use degen_taxis::ScalarField;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub t: f64,
    pub field: String,
    pub min: f64,
    pub max: f64,
    pub nx: usize,
    pub ny: usize,
    pub image: String,
}

pub fn encode_pgm(f: &ScalarField) -> Vec<u8> {
    let g = f.grid();
    let (lo, hi) = (f.min(), f.max());
    let span = hi - lo;
    let mut out = format!("P5\n{} {}\n65535\n", g.nx, g.ny).into_bytes();
    out.reserve(2 * g.len());
    for &v in f.values() {
        let code = if span > 0.0 {
            ((v - lo) / span * 65535.0).round().clamp(0.0, 65535.0) as u16
        } else {
            0
        };
        out.extend_from_slice(&code.to_be_bytes());
    }
    out
}

/// Returns `(nx, ny, codes)` in file order.
pub fn decode_pgm(bytes: &[u8]) -> Option<(usize, usize, Vec<u16>)> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return None;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).ok()?.to_string());
    }
    pos += 1;
    if fields[0] != "P5" || fields[3] != "65535" {
        return None;
    }
    let (nx, ny): (usize, usize) = (fields[1].parse().ok()?, fields[2].parse().ok()?);
    let data = bytes.get(pos..)?;
    if data.len() != 2 * nx * ny {
        return None;
    }
    Some((nx, ny, data.chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()))
}

/// Writes `<stem>.pgm` and `<stem>.json` into `dir`.
pub fn write_snapshot(dir: &Path, stem: &str, field: &str, t: f64, f: &ScalarField) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let image = dir.join(format!("{stem}.pgm"));
    fs::write(&image, encode_pgm(f))?;
    let meta = SnapshotMeta {
        t,
        field: field.into(),
        min: f.min(),
        max: f.max(),
        nx: f.grid().nx,
        ny: f.grid().ny,
        image: format!("{stem}.pgm"),
    };
    let sidecar = dir.join(format!("{stem}.json"));
    fs::write(&sidecar, serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n")?;
    Ok(vec![image, sidecar])
}
