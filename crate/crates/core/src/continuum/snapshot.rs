//! Binary wavefunction snapshots and population CSV.
//!
//! Snapshot layout (little-endian): `b"GWF1"`, `u32 nx`, `u32 ny`,
//! `f64 extent_x`, `f64 extent_y`, `f64 t`, then `nx·ny` pairs `(f64 re,
//! f64 im)` with the y index running fastest.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::grid::GridWavefunction;
use crate::darkstates::fmt12;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"GWF1";

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub nx: usize,
    pub ny: usize,
    pub extent: [f64; 2],
    pub t: f64,
    pub values: Vec<Complex64>,
}

pub fn write_snapshot(mut w: impl Write, psi: &GridWavefunction, t: f64) -> Result<()> {
    let c = &psi.config;
    let dim = |n: usize| u32::try_from(n).map_err(|_| Error::InvalidGrid(format!("{n} points do not fit the header")));
    w.write_all(MAGIC)?;
    w.write_all(&dim(c.nx)?.to_le_bytes())?;
    w.write_all(&dim(c.ny)?.to_le_bytes())?;
    for v in [c.extent[0], c.extent[1], t] {
        w.write_all(&v.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(16 * psi.values.len());
    for v in &psi.values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot(mut r: impl Read) -> Result<Snapshot> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidGrid("not a GWF1 snapshot".into()));
    }
    let mut u = [0u8; 4];
    let mut f = [0u8; 8];
    let mut read_u32 = |r: &mut dyn Read| -> Result<usize> {
        r.read_exact(&mut u)?;
        Ok(u32::from_le_bytes(u) as usize)
    };
    let nx = read_u32(&mut r)?;
    let ny = read_u32(&mut r)?;
    let mut read_f64 = |r: &mut dyn Read| -> Result<f64> {
        r.read_exact(&mut f)?;
        Ok(f64::from_le_bytes(f))
    };
    let extent = [read_f64(&mut r)?, read_f64(&mut r)?];
    let t = read_f64(&mut r)?;
    let len = nx.checked_mul(ny).ok_or_else(|| Error::InvalidGrid("snapshot dimensions overflow".into()))?;
    let mut bytes = vec![0u8; len * 16];
    r.read_exact(&mut bytes)?;
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok(Snapshot { nx, ny, extent, t, values })
}

/// `t,site_1,…,site_N` followed by one row per sample.
pub fn population_csv(times: &[f64], populations: &[Vec<f64>]) -> String {
    let n = populations.first().map_or(0, Vec::len);
    let mut out = String::from("t");
    for s in 1..=n {
        out.push_str(&format!(",site_{s}"));
    }
    out.push('\n');
    for (t, row) in times.iter().zip(populations) {
        out.push_str(&fmt12(*t));
        for p in row {
            out.push(',');
            out.push_str(&fmt12(*p));
        }
        out.push('\n');
    }
    out
}
