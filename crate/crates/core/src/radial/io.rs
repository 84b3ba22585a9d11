//! Trajectory files.
//!
//! CSV is long format with header `t,r,u`, one row per (snapshot, node).
//! The binary format is little-endian:
//!
//! ```text
//! magic "DWTRAJ01" | n: u32 | mu, p, eps, r_max, dr: f64 | count: u64
//! frames: (t: f64, values: count × f64)*
//! ```

use std::io::{Read, Write};

use super::{RadialGrid, Trajectory};
use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 8] = b"DWTRAJ01";

pub fn write_csv<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    writeln!(out, "t,r,u")?;
    for s in &traj.snapshots {
        for (i, u) in s.u.iter().enumerate() {
            writeln!(out, "{},{},{}", s.t, traj.grid.r(i), u)?;
        }
    }
    Ok(())
}

pub fn write_binary<W: Write>(traj: &Trajectory, mu: f64, mut out: W) -> Result<()> {
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&traj.n.to_le_bytes())?;
    for x in [mu, traj.p, traj.epsilon, traj.grid.r_max, traj.grid.dr] {
        out.write_all(&x.to_le_bytes())?;
    }
    out.write_all(&(traj.grid.count as u64).to_le_bytes())?;
    for s in &traj.snapshots {
        out.write_all(&s.t.to_le_bytes())?;
        for u in &s.u {
            out.write_all(&u.to_le_bytes())?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryTrajectory {
    pub n: u32,
    pub mu: f64,
    pub p: f64,
    pub epsilon: f64,
    pub grid: RadialGrid,
    pub frames: Vec<(f64, Vec<f64>)>,
}

fn read_f64<R: Read>(r: &mut R) -> std::io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_binary<R: Read>(mut input: R) -> Result<BinaryTrajectory> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(Error::Io("not a trajectory file (bad magic)".into()));
    }
    let mut nb = [0u8; 4];
    input.read_exact(&mut nb)?;
    let n = u32::from_le_bytes(nb);
    let mu = read_f64(&mut input)?;
    let p = read_f64(&mut input)?;
    let epsilon = read_f64(&mut input)?;
    let r_max = read_f64(&mut input)?;
    let dr = read_f64(&mut input)?;
    let mut cb = [0u8; 8];
    input.read_exact(&mut cb)?;
    let count = u64::from_le_bytes(cb) as usize;
    let mut rest = Vec::new();
    input.read_to_end(&mut rest)?;
    let frame_len = 8 * (count + 1);
    if count == 0 || rest.len() % frame_len != 0 {
        return Err(Error::Io(format!("truncated trajectory: {} trailing bytes", rest.len() % frame_len.max(1))));
    }
    let frames = rest
        .chunks_exact(frame_len)
        .map(|c| {
            let mut vals = c.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")));
            let t = vals.next().expect("frame time");
            (t, vals.collect())
        })
        .collect();
    Ok(BinaryTrajectory { n, mu, p, epsilon, grid: RadialGrid { r_max, dr, count }, frames })
}
