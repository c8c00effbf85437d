//! Binary checkpoints of a [`PairState`].
//!
//! Layout (little-endian): magic `PPCK`, version u32, n_points u64, r_min f64,
//! dr f64, time_ps f64, manifold count u32, then per manifold: tag u8
//! (0 triplet, 1 singlet), weight f64, has_excited u8, ground (re, im) pairs,
//! and the excited pairs if present.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Manifold, ManifoldState, PairState};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::C64;

const MAGIC: &[u8; 4] = b"PPCK";
const VERSION: u32 = 1;

pub fn write_checkpoint(path: &Path, state: &PairState) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(state.grid.n_points as u64).to_le_bytes())?;
    w.write_all(&state.grid.r_min.to_le_bytes())?;
    w.write_all(&state.grid.dr.to_le_bytes())?;
    w.write_all(&state.time_ps.to_le_bytes())?;
    w.write_all(&(state.manifolds.len() as u32).to_le_bytes())?;
    for m in &state.manifolds {
        let tag: u8 = match m.manifold {
            Manifold::Triplet => 0,
            Manifold::Singlet => 1,
        };
        w.write_all(&[tag])?;
        w.write_all(&m.weight.to_le_bytes())?;
        w.write_all(&[m.excited.is_some() as u8])?;
        write_complex(&mut w, &m.ground)?;
        if let Some(e) = &m.excited {
            write_complex(&mut w, e)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<PairState> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Precondition(format!("{} is not a checkpoint", path.display())));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Precondition(format!("unsupported checkpoint version {version}")));
    }
    let n = read_u64(&mut r)? as usize;
    let r_min = read_f64(&mut r)?;
    let dr = read_f64(&mut r)?;
    let mut grid = Grid::new(r_min, r_min + dr * (n as f64 - 1.0), n)?;
    grid.dr = dr;
    let time_ps = read_f64(&mut r)?;
    let count = read_u32(&mut r)? as usize;
    let mut manifolds = Vec::with_capacity(count);
    for _ in 0..count {
        let mut b = [0u8; 1];
        r.read_exact(&mut b)?;
        let manifold = match b[0] {
            0 => Manifold::Triplet,
            1 => Manifold::Singlet,
            t => return Err(Error::Precondition(format!("bad manifold tag {t}"))),
        };
        let weight = read_f64(&mut r)?;
        r.read_exact(&mut b)?;
        let ground = read_complex(&mut r, n)?;
        let excited = if b[0] == 1 { Some(read_complex(&mut r, n)?) } else { None };
        manifolds.push(ManifoldState { manifold, weight, ground, excited });
    }
    Ok(PairState { grid, time_ps, manifolds })
}

fn write_complex<W: Write>(w: &mut W, v: &[C64]) -> Result<()> {
    for z in v {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_complex<R: Read>(r: &mut R, n: usize) -> Result<Vec<C64>> {
    (0..n).map(|_| Ok(C64::new(read_f64(r)?, read_f64(r)?))).collect()
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let grid = Grid::new(3.0, 30.0, 16).unwrap();
        let t: Vec<f64> = (0..16).map(|i| (i as f64).cos()).collect();
        let s: Vec<f64> = (0..16).map(|i| (i as f64).sin()).collect();
        let mut st = PairState::two_manifold(grid, &t, &s, 0.75).unwrap();
        st.time_ps = 12.5;
        st.manifolds[1].excited = Some(vec![C64::new(0.1, -0.2); 16]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.bin");
        write_checkpoint(&p, &st).unwrap();
        let back = read_checkpoint(&p).unwrap();
        assert_eq!(back.manifolds, st.manifolds);
        assert_eq!(back.time_ps, st.time_ps);
        assert_eq!((back.grid.n_points, back.grid.r_min, back.grid.dr), (16, 3.0, grid.dr));
    }
}
