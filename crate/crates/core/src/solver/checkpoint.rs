//! Binary field dumps: a 32-byte header (magic `IWF1`, three `u32`
//! dimensions, `h` and `t` as `f64`) followed by little-endian `f64` values in
//! row-major `(i, j, k)` order.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::solver::state::WaveState;

pub const MAGIC: [u8; 4] = *b"IWF1";
pub const HEADER_LEN: usize = 32;

/// Two consecutive levels, enough to restart the leapfrog scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub t: f64,
    pub dt: f64,
    pub step_index: usize,
    pub n: usize,
    pub h: f64,
    pub u_prev: Vec<f64>,
    pub u_curr: Vec<f64>,
}

impl Checkpoint {
    pub fn capture(state: &WaveState, n: usize, h: f64) -> Self {
        Checkpoint {
            t: state.t,
            dt: state.dt,
            step_index: state.step_index,
            n,
            h,
            u_prev: state.u_prev.clone(),
            u_curr: state.u_curr.clone(),
        }
    }

    pub fn restore(&self) -> WaveState {
        WaveState {
            u_prev: self.u_prev.clone(),
            u_curr: self.u_curr.clone(),
            u_next: vec![0.0; self.u_curr.len()],
            t: self.t,
            dt: self.dt,
            step_index: self.step_index,
        }
    }

    /// Write `<stem>_prev.bin` and `<stem>_curr.bin` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<[PathBuf; 2]> {
        let prev = dir.join(format!("{stem}_prev.bin"));
        let curr = dir.join(format!("{stem}_curr.bin"));
        write_field(&prev, self.n, self.h, self.t - self.dt, &self.u_prev)?;
        write_field(&curr, self.n, self.h, self.t, &self.u_curr)?;
        Ok([prev, curr])
    }

    pub fn read(dir: &Path, stem: &str, dt: f64) -> Result<Self> {
        let (n, h, t_prev, u_prev) = read_field(&dir.join(format!("{stem}_prev.bin")))?;
        let (n2, _, t, u_curr) = read_field(&dir.join(format!("{stem}_curr.bin")))?;
        if n != n2 || ((t - t_prev) - dt).abs() > 1e-9 * (1.0 + t.abs()) {
            return Err(Error::Missing(format!("checkpoint {stem} levels are inconsistent")));
        }
        Ok(Checkpoint {
            t,
            dt,
            step_index: (t / dt).round() as usize,
            n,
            h,
            u_prev,
            u_curr,
        })
    }
}

pub fn write_field(path: &Path, n: usize, h: f64, t: f64, data: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * data.len());
    buf.extend_from_slice(&MAGIC);
    for _ in 0..3 {
        buf.extend_from_slice(&(n as u32).to_le_bytes());
    }
    buf.extend_from_slice(&h.to_le_bytes());
    buf.extend_from_slice(&t.to_le_bytes());
    for v in data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(&buf))
        .map_err(|e| Error::io(path, e))
}

/// Returns `(n, h, t, data)`.
pub fn read_field(path: &Path) -> Result<(usize, f64, f64, Vec<f64>)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let corrupt = |why: &str| Error::Missing(format!("{}: {why}", path.display()));
    if bytes.len() < HEADER_LEN || bytes[..4] != MAGIC {
        return Err(corrupt("not a field dump"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let dims = [u32_at(4), u32_at(8), u32_at(12)];
    if dims[0] != dims[1] || dims[1] != dims[2] {
        return Err(corrupt("non-cubic dimensions"));
    }
    let len = dims[0] * dims[1] * dims[2];
    if bytes.len() != HEADER_LEN + 8 * len {
        return Err(corrupt("length does not match dimensions"));
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((dims[0], f64_at(16), f64_at(24), data))
}
