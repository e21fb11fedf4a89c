//! Binary snapshots: a 64-byte little-endian header (`"QGHS"`, version,
//! `N_x`, `N_y`, `N_z`, `L_h`, `Z_max`, zero padding) followed by physical
//! values as `f64`, level-major then `x₂` then `x₁`. A 3D scalar stores
//! `N_z + 1` levels (surface value first); a surface field uses `N_z = 0`.

use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{QgError, Result};
use crate::field::{ScalarField3D, SurfaceField2D};
use crate::grid::Grid;

pub const MAGIC: &[u8; 4] = b"QGHS";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotHeader {
    pub nx: u32,
    pub ny: u32,
    pub nz: u32,
    pub lh: f64,
    pub zmax: f64,
}

impl SnapshotHeader {
    pub fn levels(&self) -> usize {
        self.nz as usize + 1
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(MAGIC);
        b[4..8].copy_from_slice(&VERSION.to_le_bytes());
        b[8..12].copy_from_slice(&self.nx.to_le_bytes());
        b[12..16].copy_from_slice(&self.ny.to_le_bytes());
        b[16..20].copy_from_slice(&self.nz.to_le_bytes());
        b[20..28].copy_from_slice(&self.lh.to_le_bytes());
        b[28..36].copy_from_slice(&self.zmax.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        if b.len() < HEADER_LEN || &b[0..4] != MAGIC {
            return Err(QgError::SnapshotFormat("missing QGHS magic".into()));
        }
        let u = |i: usize| u32::from_le_bytes(b[i..i + 4].try_into().unwrap());
        let f = |i: usize| f64::from_le_bytes(b[i..i + 8].try_into().unwrap());
        if u(4) != VERSION {
            return Err(QgError::SnapshotFormat(format!("unsupported version {}", u(4))));
        }
        Ok(SnapshotHeader { nx: u(8), ny: u(12), nz: u(16), lh: f(20), zmax: f(28) })
    }
}

fn header(grid: &Grid, nz: u32) -> SnapshotHeader {
    SnapshotHeader { nx: grid.nx as u32, ny: grid.ny as u32, nz, lh: grid.lh, zmax: grid.zmax }
}

fn write_values(w: &mut impl Write, h: &SnapshotHeader, v: &[f64]) -> Result<()> {
    w.write_all(&h.to_bytes())?;
    let mut buf = Vec::with_capacity(v.len() * 8);
    for x in v {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn write_scalar(w: &mut impl Write, f: &ScalarField3D) -> Result<()> {
    write_values(w, &header(&f.grid, f.grid.nz as u32), &f.to_physical())
}

pub fn write_surface(w: &mut impl Write, f: &SurfaceField2D) -> Result<()> {
    write_values(w, &header(&f.grid, 0), &f.to_physical())
}

/// Reads a header and its values.
pub fn read(r: &mut impl Read) -> Result<(SnapshotHeader, Vec<f64>)> {
    let mut hb = [0u8; HEADER_LEN];
    r.read_exact(&mut hb).map_err(|e| QgError::SnapshotFormat(format!("short header: {e}")))?;
    let h = SnapshotHeader::from_bytes(&hb)?;
    let n = h.levels() * h.nx as usize * h.ny as usize;
    let mut body = vec![0u8; n * 8];
    r.read_exact(&mut body).map_err(|e| QgError::SnapshotFormat(format!("short body: {e}")))?;
    let v = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((h, v))
}

fn check_grid(h: &SnapshotHeader, grid: &Grid, nz: usize) -> Result<()> {
    if h.nx as usize != grid.nx || h.ny as usize != grid.ny || h.nz as usize != nz || h.lh != grid.lh || h.zmax != grid.zmax {
        return Err(QgError::GridMismatch(format!("snapshot {h:?} does not match {grid:?}")));
    }
    Ok(())
}

pub fn read_scalar(r: &mut impl Read, grid: &Arc<Grid>) -> Result<ScalarField3D> {
    let (h, v) = read(r)?;
    check_grid(&h, grid, grid.nz)?;
    ScalarField3D::from_physical(grid, &v)
}

pub fn read_surface(r: &mut impl Read, grid: &Arc<Grid>) -> Result<SurfaceField2D> {
    let (h, v) = read(r)?;
    check_grid(&h, grid, 0)?;
    SurfaceField2D::from_physical(grid, &v)
}
