//! Spectrum cache files and point-cloud text input.
//!
//! Cache layout (little-endian): magic `GSPC`, u32 version, u32 dimension,
//! u64 n_nodes, u64 n_modes, f64 volume, then `n_nodes` weights, `n_modes` eigenvalues
//! and the row-major `n_nodes × n_modes` eigenfunction matrix as f64, and
//! finally a u64 FNV-1a checksum of every preceding byte.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::{Basis, Metric, QuadratureNodes, Spectrum};
use crate::error::{Error, Result};

pub const SPECTRUM_MAGIC: &[u8; 4] = b"GSPC";
pub const SPECTRUM_FORMAT_VERSION: u32 = 2;

const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8 + 8;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Serialize a spectrum into the cache layout.
pub fn encode_spectrum(spectrum: &Spectrum) -> Vec<u8> {
    let (n_nodes, n_modes) = (spectrum.n_nodes(), spectrum.n_modes());
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * (n_nodes + n_modes + n_nodes * n_modes + 1));
    buf.extend_from_slice(SPECTRUM_MAGIC);
    buf.extend_from_slice(&SPECTRUM_FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(spectrum.dimension() as u32).to_le_bytes());
    buf.extend_from_slice(&(n_nodes as u64).to_le_bytes());
    buf.extend_from_slice(&(n_modes as u64).to_le_bytes());
    buf.extend_from_slice(&spectrum.volume().to_le_bytes());
    for w in spectrum.weights() {
        buf.extend_from_slice(&w.to_le_bytes());
    }
    for l in spectrum.eigenvalues() {
        buf.extend_from_slice(&l.to_le_bytes());
    }
    let e = spectrum.eigenfunctions();
    for i in 0..n_nodes {
        for n in 0..n_modes {
            buf.extend_from_slice(&e[(i, n)].to_le_bytes());
        }
    }
    let checksum = fnv1a(&buf);
    buf.extend_from_slice(&checksum.to_le_bytes());
    buf
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, len: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&end| end <= self.bytes.len())
            .ok_or_else(|| Error::Format(format!("truncated file: needed {len} bytes at offset {}", self.pos)))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, count: usize) -> Result<Vec<f64>> {
        let len = count
            .checked_mul(8)
            .ok_or_else(|| Error::Format("section length overflows".into()))?;
        Ok(self
            .take(len)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

/// Parse the cache layout. The returned spectrum carries weights but no node
/// coordinates; attach them with [`Spectrum::with_geometry`].
pub fn decode_spectrum(bytes: &[u8]) -> Result<Spectrum> {
    let mut reader = Reader { bytes, pos: 0 };
    if reader.take(4)? != SPECTRUM_MAGIC {
        return Err(Error::Format("bad magic bytes, not a spectrum cache".into()));
    }
    let version = reader.u32()?;
    if version != SPECTRUM_FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let dimension = reader.u32()? as usize;
    let n_nodes = usize::try_from(reader.u64()?).map_err(|_| Error::Format("node count overflows".into()))?;
    let n_modes = usize::try_from(reader.u64()?).map_err(|_| Error::Format("mode count overflows".into()))?;
    let matrix_len = n_nodes
        .checked_mul(n_modes)
        .ok_or_else(|| Error::Format("matrix size overflows".into()))?;
    let volume = reader.f64s(1)?[0];
    let weights = reader.f64s(n_nodes)?;
    let eigenvalues = reader.f64s(n_modes)?;
    let row_major = reader.f64s(matrix_len)?;
    let body_len = reader.pos;
    let stored = reader.u64()?;
    if reader.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - reader.pos)));
    }
    let computed = fnv1a(&bytes[..body_len]);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }

    let nodes = QuadratureNodes::new(Vec::new(), weights, volume, Metric::Unknown)?;
    let eigenfunctions = DMatrix::from_row_slice(n_nodes, n_modes, &row_major);
    Spectrum::new(eigenvalues, eigenfunctions, nodes, dimension, Basis::Sampled)
}

pub fn save_spectrum(spectrum: &Spectrum, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_spectrum(spectrum))?;
    Ok(())
}

pub fn load_spectrum(path: impl AsRef<Path>) -> Result<Spectrum> {
    decode_spectrum(&fs::read(path)?)
}

/// Read a point cloud: one point per line, columns separated by whitespace
/// or commas, `#` starts a comment line, blank lines are ignored.
pub fn read_point_cloud(path: impl AsRef<Path>) -> Result<Vec<Vec<f64>>> {
    parse_point_cloud(&fs::read_to_string(path)?)
}

pub fn parse_point_cloud(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let point = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|tok| !tok.is_empty())
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| Error::Format(format!("line {}: {tok:?}: {e}", lineno + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = points.first() {
            if first.len() != point.len() {
                return Err(Error::Format(format!(
                    "line {}: {} columns, expected {}",
                    lineno + 1,
                    point.len(),
                    first.len()
                )));
            }
        }
        points.push(point);
    }
    if points.is_empty() {
        return Err(Error::Format("point cloud contains no points".into()));
    }
    Ok(points)
}
