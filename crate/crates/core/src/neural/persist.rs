//! Binary weight container.
//!
//! Layout (little-endian): magic `KTRN`, version `u32`, input width `u32`,
//! hidden size `u32`, skill count `u32`, cell kind `u32` (0 vanilla,
//! 1 gated), seed `u64`, then every tensor as row-major `f64` in the order
//! `W_hx, W_hh, W_yh, b_h, b_y, h_0`.

use std::io::{Read, Write};

use super::params::{CellKind, RnnParams};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"KTRN";
pub const VERSION: u32 = 1;

pub fn write_params<W: Write>(mut out: W, p: &RnnParams) -> std::io::Result<()> {
    out.write_all(&MAGIC)?;
    for v in [
        VERSION,
        p.input_dim() as u32,
        p.hidden() as u32,
        p.n_skills() as u32,
        p.cell.code(),
    ] {
        out.write_all(&v.to_le_bytes())?;
    }
    out.write_all(&p.seed.to_le_bytes())?;
    for t in p.tensors() {
        for v in t {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|e| Error::Format(e.to_string()))?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_params<R: Read>(mut input: R) -> Result<RnnParams> {
    let mut magic = [0u8; 4];
    input
        .read_exact(&mut magic)
        .map_err(|e| Error::Format(e.to_string()))?;
    if magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let input_dim = read_u32(&mut input)? as usize;
    let hidden = read_u32(&mut input)? as usize;
    let n_skills = read_u32(&mut input)? as usize;
    let cell = CellKind::from_code(read_u32(&mut input)?)?;
    let mut seed = [0u8; 8];
    input
        .read_exact(&mut seed)
        .map_err(|e| Error::Format(e.to_string()))?;

    let mut p = RnnParams::zeros(cell, input_dim, hidden, n_skills);
    p.seed = u64::from_le_bytes(seed);
    for t in p.tensors_mut() {
        for v in t.iter_mut() {
            let mut b = [0u8; 8];
            input
                .read_exact(&mut b)
                .map_err(|_| Error::Format("truncated weights".into()))?;
            *v = f64::from_le_bytes(b);
        }
    }
    let mut rest = Vec::new();
    input
        .read_to_end(&mut rest)
        .map_err(|e| Error::Format(e.to_string()))?;
    if !rest.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes", rest.len())));
    }
    Ok(p)
}
