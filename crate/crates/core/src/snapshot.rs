//! Binary state snapshots.
//!
//! Layout, all little-endian: `b"SHCS"`, `u32` format version, `u32` spatial
//! dimension, `u32` modes per axis, two `f64` side lengths (second is 0 in
//! 1-D), then the coefficients as `f64` in basis order. The header is 32 bytes.

use std::path::Path;
use std::sync::Arc;

use crate::basis::{BasisSpec, Domain};
use crate::error::{Result, ShsimError};
use crate::field::SpectralField;

pub const MAGIC: &[u8; 4] = b"SHCS";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotHeader {
    pub version: u32,
    pub dimension: u32,
    pub n_modes: u32,
    pub lengths: [f64; 2],
}

impl SnapshotHeader {
    pub fn of(basis: &BasisSpec) -> Self {
        Self {
            version: VERSION,
            dimension: basis.domain().dimension() as u32,
            n_modes: basis.n_modes() as u32,
            lengths: basis.domain().lengths(),
        }
    }

    pub fn coefficient_count(&self) -> usize {
        (self.n_modes as usize).pow(self.dimension)
    }

    pub fn domain(&self) -> Result<Domain> {
        match self.dimension {
            1 => Ok(Domain::Interval { length: self.lengths[0] }),
            2 => Ok(Domain::Rectangle {
                lx: self.lengths[0],
                ly: self.lengths[1],
            }),
            d => Err(ShsimError::Snapshot(format!("unsupported dimension {d}"))),
        }
    }
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

pub fn encode(u: &SpectralField) -> Vec<u8> {
    let h = SnapshotHeader::of(u.basis());
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * u.dim());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&h.version.to_le_bytes());
    out.extend_from_slice(&h.dimension.to_le_bytes());
    out.extend_from_slice(&h.n_modes.to_le_bytes());
    for l in h.lengths {
        out.extend_from_slice(&l.to_le_bytes());
    }
    for c in u.coeffs() {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out
}

pub fn decode_header(bytes: &[u8]) -> Result<SnapshotHeader> {
    if bytes.len() < HEADER_LEN {
        return Err(ShsimError::Snapshot(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(ShsimError::Snapshot("bad magic".into()));
    }
    let h = SnapshotHeader {
        version: u32_at(bytes, 4),
        dimension: u32_at(bytes, 8),
        n_modes: u32_at(bytes, 12),
        lengths: [f64_at(bytes, 16), f64_at(bytes, 24)],
    };
    if h.version != VERSION {
        return Err(ShsimError::Snapshot(format!("unsupported version {}", h.version)));
    }
    h.domain()?;
    let want = HEADER_LEN + 8 * h.coefficient_count();
    if bytes.len() != want {
        return Err(ShsimError::Snapshot(format!("expected {want} bytes, found {}", bytes.len())));
    }
    Ok(h)
}

/// Coefficients of a snapshot without binding them to a basis.
pub fn decode_coefficients(bytes: &[u8]) -> Result<(SnapshotHeader, Vec<f64>)> {
    let h = decode_header(bytes)?;
    let coeffs = bytes[HEADER_LEN..].chunks_exact(8).map(|c| f64_at(c, 0)).collect();
    Ok((h, coeffs))
}

/// Decode onto `basis`, which must match the stored domain and mode count.
pub fn decode(bytes: &[u8], basis: &Arc<BasisSpec>) -> Result<SpectralField> {
    let (h, coeffs) = decode_coefficients(bytes)?;
    let expect = SnapshotHeader::of(basis);
    if h.dimension != expect.dimension
        || h.n_modes != expect.n_modes
        || h.lengths.map(f64::to_bits) != expect.lengths.map(f64::to_bits)
    {
        return Err(ShsimError::Snapshot(format!("snapshot {h:?} does not match basis {expect:?}")));
    }
    SpectralField::from_coeffs(basis, coeffs)
}

pub fn write_snapshot(path: &Path, u: &SpectralField) -> Result<()> {
    std::fs::write(path, encode(u))?;
    Ok(())
}

pub fn read_snapshot(path: &Path, basis: &Arc<BasisSpec>) -> Result<SpectralField> {
    decode(&std::fs::read(path)?, basis)
}
