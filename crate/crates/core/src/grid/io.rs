use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Eigenpair, Grid};
use crate::error::{Error, Result};
use crate::units::au_to_cm1;

/// Little-endian blob: n_points (u64), r_min (f64), dr (f64), then n_points f64.
pub fn write_wavefunction_blob(path: &Path, grid: &Grid, psi: &[f64]) -> Result<()> {
    super::check_len(grid.n_points, psi.len())?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(grid.n_points as u64).to_le_bytes())?;
    w.write_all(&grid.r_min.to_le_bytes())?;
    w.write_all(&grid.dr.to_le_bytes())?;
    for x in psi {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_wavefunction_blob(path: &Path) -> Result<(Grid, Vec<f64>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let r_min = f64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let dr = f64::from_le_bytes(b8);
    if n < 2 {
        return Err(Error::InvalidGrid(format!("blob declares {n} points")));
    }
    let mut grid = Grid::new(r_min, r_min + dr * (n - 1) as f64, n)?;
    grid.dr = dr;
    let mut psi = Vec::with_capacity(n);
    for _ in 0..n {
        r.read_exact(&mut b8)?;
        psi.push(f64::from_le_bytes(b8));
    }
    Ok((grid, psi))
}

/// Writes `energy_cm1,node_count` rows after a `# config_hash=` line.
pub fn write_eigen_csv<W: Write>(out: W, hash: &str, pairs: &[Eigenpair]) -> Result<()> {
    let mut out = out;
    writeln!(out, "# config_hash={hash}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["energy_cm1", "node_count"])?;
    for p in pairs {
        w.write_record([format!("{:.12e}", au_to_cm1(p.energy)), p.nodes().to_string()])?;
    }
    w.flush()?;
    Ok(())
}
