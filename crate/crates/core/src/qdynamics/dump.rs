//! Binary wavefunction dumps.
//!
//! Layout, all little-endian:
//!
//! ```text
//! offset  0  u64  n
//! offset  8  f64  x_min
//! offset 16  f64  x_max
//! offset 24  f64  t
//! offset 32  u64  frame tag (0 gravitational, 1 freely-falling, 2 gravitational-interaction)
//! offset 40  n × (f64 re, f64 im)
//! ```

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{Frame, Grid, Wavefunction};
use crate::error::{Error, Result};

pub const HEADER_LEN: usize = 40;

pub fn write_dump<W: Write>(psi: &Wavefunction, mut w: W) -> std::io::Result<()> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 16 * psi.amps.len());
    buf.extend_from_slice(&(psi.grid.len() as u64).to_le_bytes());
    buf.extend_from_slice(&psi.grid.x_min().to_le_bytes());
    buf.extend_from_slice(&psi.grid.x_max().to_le_bytes());
    buf.extend_from_slice(&psi.t.to_le_bytes());
    buf.extend_from_slice(&psi.frame.tag().to_le_bytes());
    for z in &psi.amps {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)
}

fn word(bytes: &[u8], at: usize) -> [u8; 8] {
    bytes[at..at + 8].try_into().expect("slice of length 8")
}

pub fn read_dump<R: Read>(mut r: R) -> Result<Wavefunction> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| Error::Format(format!("read failed: {e}")))?;
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let n = u64::from_le_bytes(word(&bytes, 0)) as usize;
    let x_min = f64::from_le_bytes(word(&bytes, 8));
    let x_max = f64::from_le_bytes(word(&bytes, 16));
    let t = f64::from_le_bytes(word(&bytes, 24));
    let tag = u64::from_le_bytes(word(&bytes, 32));
    let frame = Frame::from_tag(tag).ok_or_else(|| Error::Format(format!("unknown frame tag {tag}")))?;
    let expected = n
        .checked_mul(16)
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::Format(format!("point count {n} overflows")))?;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "expected {expected} bytes for n = {n}, found {}",
            bytes.len()
        )));
    }
    let grid = Grid::new(x_min, x_max, n)?;
    let amps = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| Complex64::new(f64::from_le_bytes(word(c, 0)), f64::from_le_bytes(word(c, 8))))
        .collect();
    Wavefunction::from_amps(grid, amps, frame, t)
}
