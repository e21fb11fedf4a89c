//! Binary checkpoint: `"QGCK"`, version, manifest hash, step, time, scheme
//! tag, raw spectral blocks and the diagnostics CSV written so far. All
//! numbers little-endian.

use std::fs;
use std::path::Path;

use qg_core::C64;

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 4] = b"QGCK";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub hash: [u8; 32],
    pub step: u64,
    pub t: f64,
    /// 0 for the reformulated scheme, 1 for the classical one.
    pub scheme: u8,
    pub blocks: Vec<Vec<C64>>,
    pub csv: String,
}

struct Cursor<'a> {
    b: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.b.len() {
            return Err(CliError::Checkpoint("truncated file".into()));
        }
        let s = &self.b[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&VERSION.to_le_bytes());
        b.extend_from_slice(&self.hash);
        b.extend_from_slice(&self.step.to_le_bytes());
        b.extend_from_slice(&self.t.to_le_bytes());
        b.push(self.scheme);
        b.extend_from_slice(&(self.blocks.len() as u64).to_le_bytes());
        for blk in &self.blocks {
            b.extend_from_slice(&(blk.len() as u64).to_le_bytes());
            for c in blk {
                b.extend_from_slice(&c.re.to_le_bytes());
                b.extend_from_slice(&c.im.to_le_bytes());
            }
        }
        b.extend_from_slice(&(self.csv.len() as u64).to_le_bytes());
        b.extend_from_slice(self.csv.as_bytes());
        b
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        let mut c = Cursor { b, at: 0 };
        if c.take(4)? != MAGIC {
            return Err(CliError::Checkpoint("missing QGCK magic".into()));
        }
        let v = u32::from_le_bytes(c.take(4)?.try_into().unwrap());
        if v != VERSION {
            return Err(CliError::Checkpoint(format!("unsupported version {v}")));
        }
        let hash: [u8; 32] = c.take(32)?.try_into().unwrap();
        let step = c.u64()?;
        let t = c.f64()?;
        let scheme = c.take(1)?[0];
        let nb = c.u64()? as usize;
        let mut blocks = Vec::with_capacity(nb.min(16));
        for _ in 0..nb {
            let n = c.u64()? as usize;
            let mut blk = Vec::with_capacity(n.min(b.len() / 16));
            for _ in 0..n {
                let re = c.f64()?;
                blk.push(C64::new(re, c.f64()?));
            }
            blocks.push(blk);
        }
        let n = c.u64()? as usize;
        let csv = String::from_utf8(c.take(n)?.to_vec()).map_err(|_| CliError::Checkpoint("CSV is not UTF-8".into()))?;
        if c.at != b.len() {
            return Err(CliError::Checkpoint("trailing bytes".into()));
        }
        Ok(Checkpoint { hash, step, t, scheme, blocks, csv })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, self.to_bytes())?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?)
    }
}
