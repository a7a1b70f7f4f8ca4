//! Signal import and export.
//!
//! Text: one `index value` pair per line, `#` comments allowed, indices
//! must cover 0..N exactly once. Raw: magic `GSIG`, u32 version, u64 count,
//! then `count` little-endian f64 values.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use super::Signal;
use crate::error::{Error, Result};
use crate::spectra::Spectrum;

pub const SIGNAL_MAGIC: &[u8; 4] = b"GSIG";
const SIGNAL_VERSION: u32 = 1;

pub fn write_signal_text(signal: &Signal, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::with_capacity(24 * signal.len());
    for (i, v) in signal.values().iter().enumerate() {
        writeln!(out, "{i} {v:?}").expect("writing to a String");
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_signal_text(spectrum: Arc<Spectrum>, path: impl AsRef<Path>) -> Result<Signal> {
    let text = fs::read_to_string(path)?;
    let n = spectrum.n_nodes();
    let mut values: Vec<Option<f64>> = vec![None; n];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| Error::Format(format!("line {}: {msg}", lineno + 1));
        let mut tokens = line.split_whitespace();
        let (Some(index), Some(value), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(bad("expected `index value`".into()));
        };
        let index: usize = index.parse().map_err(|e| bad(format!("{index:?}: {e}")))?;
        let value: f64 = value.parse().map_err(|e| bad(format!("{value:?}: {e}")))?;
        let slot = values
            .get_mut(index)
            .ok_or_else(|| bad(format!("index {index} out of range for {n} nodes")))?;
        if slot.replace(value).is_some() {
            return Err(bad(format!("duplicate index {index}")));
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::Format(format!("missing value for node {i}"))))
        .collect::<Result<Vec<f64>>>()?;
    Signal::new(spectrum, values)
}

pub fn write_signal_raw(signal: &Signal, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::with_capacity(16 + 8 * signal.len());
    buf.extend_from_slice(SIGNAL_MAGIC);
    buf.extend_from_slice(&SIGNAL_VERSION.to_le_bytes());
    buf.extend_from_slice(&(signal.len() as u64).to_le_bytes());
    for v in signal.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_signal_raw(spectrum: Arc<Spectrum>, path: impl AsRef<Path>) -> Result<Signal> {
    let bytes = fs::read(path)?;
    if bytes.len() < 16 || &bytes[..4] != SIGNAL_MAGIC {
        return Err(Error::Format("not a raw signal file".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != SIGNAL_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let body = &bytes[16..];
    if (body.len() as u64) != count.saturating_mul(8) {
        return Err(Error::Format(format!(
            "header announces {count} values, body holds {} bytes",
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Signal::new(spectrum, values)
}
