//! Uniform radial grid, Fourier kinetic operator and grid Hamiltonians.

mod eigen;
mod io;

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, ShapeBuilder};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::ChannelPotential;
use crate::C64;

pub use eigen::{eigensolve, eigensolve_interval, inertia_count, Eigenpair, Which};
pub use io::{read_wavefunction_blob, write_eigen_csv, write_wavefunction_blob};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
    pub dr: f64,
}

impl Grid {
    pub fn new(r_min: f64, r_max: f64, n_points: usize) -> Result<Grid> {
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= 2, got {n_points}"
            )));
        }
        if !(r_max > r_min) || !r_min.is_finite() || !r_max.is_finite() {
            return Err(Error::InvalidGrid(format!("need r_max > r_min, got [{r_min}, {r_max}]")));
        }
        let dr = (r_max - r_min) / (n_points - 1) as f64;
        Ok(Grid { r_min, r_max, n_points, dr })
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        self.r_min + i as f64 * self.dr
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.r(i)).collect()
    }

    pub fn k_max(&self) -> f64 {
        PI / self.dr
    }

    /// Period of the Fourier representation.
    pub fn period(&self) -> f64 {
        self.n_points as f64 * self.dr
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = 2.0 * PI / self.period();
        (0..n)
            .map(|j| if j <= n / 2 { j as f64 * dk } else { (j as f64 - n as f64) * dk })
            .collect()
    }

    pub fn kinetic_max(&self, mass: f64) -> f64 {
        let k = self.k_max();
        k * k / (2.0 * mass)
    }

    /// Momentum coverage check: k_max must exceed the largest local momentum
    /// sqrt(2 mass (e_max - v_min)) by at least `factor`.
    pub fn check_coverage(&self, mass: f64, e_max: f64, v_min: f64, factor: f64) -> Result<()> {
        let p = (2.0 * mass * (e_max - v_min).max(0.0)).sqrt();
        if self.k_max() < factor * p {
            return Err(Error::InvalidGrid(format!(
                "k_max = {:.4} bohr^-1 below {factor} x local momentum {p:.4}; increase n_points",
                self.k_max()
            )));
        }
        Ok(())
    }

    pub fn index_of(&self, r: f64) -> usize {
        let x = ((r - self.r_min) / self.dr).round();
        x.clamp(0.0, (self.n_points - 1) as f64) as usize
    }
}

/// Spectral kinetic operator k^2/2m applied by FFT.
#[derive(Clone)]
pub struct KineticOperator {
    pub grid: Grid,
    pub mass: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    energies: Vec<f64>,
}

impl std::fmt::Debug for KineticOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KineticOperator").field("grid", &self.grid).field("mass", &self.mass).finish()
    }
}

impl KineticOperator {
    pub fn new(grid: Grid, mass: f64) -> KineticOperator {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n_points);
        let inv = planner.plan_fft_inverse(grid.n_points);
        let energies = grid.wavenumbers().iter().map(|k| k * k / (2.0 * mass)).collect();
        KineticOperator { grid, mass, fwd, inv, energies }
    }

    /// k^2/2m in FFT order.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn scratch_len(&self) -> usize {
        self.fwd.get_inplace_scratch_len().max(self.inv.get_inplace_scratch_len())
    }

    pub fn forward(&self, buf: &mut [C64], scratch: &mut [C64]) {
        self.fwd.process_with_scratch(buf, scratch);
    }

    /// Unnormalized inverse transform; callers fold 1/n into their multipliers.
    pub fn inverse(&self, buf: &mut [C64], scratch: &mut [C64]) {
        self.inv.process_with_scratch(buf, scratch);
    }

    /// Replaces `buf` with T buf.
    pub fn apply_in_place(&self, buf: &mut [C64], scratch: &mut [C64]) {
        let scale = 1.0 / self.grid.n_points as f64;
        self.fwd.process_with_scratch(buf, scratch);
        for (b, e) in buf.iter_mut().zip(&self.energies) {
            *b *= e * scale;
        }
        self.inv.process_with_scratch(buf, scratch);
    }

    pub fn apply(&self, psi: &[C64]) -> Result<Vec<C64>> {
        check_len(self.grid.n_points, psi.len())?;
        let mut out = psi.to_vec();
        let mut scratch = vec![C64::new(0.0, 0.0); self.scratch_len()];
        self.apply_in_place(&mut out, &mut scratch);
        Ok(out)
    }

    /// First row of the (circulant, real symmetric) kinetic matrix.
    pub fn matrix_row(&self) -> Vec<f64> {
        let n = self.grid.n_points;
        let mut buf: Vec<C64> = self.energies.iter().map(|&e| C64::new(e / n as f64, 0.0)).collect();
        let mut scratch = vec![C64::new(0.0, 0.0); self.scratch_len()];
        self.inv.process_with_scratch(&mut buf, &mut scratch);
        buf.iter().map(|c| c.re).collect()
    }
}

pub fn apply_kinetic(grid: &Grid, mass: f64, psi: &[C64]) -> Result<Vec<C64>> {
    KineticOperator::new(*grid, mass).apply(psi)
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}

/// Smooth cap keeping grid potentials below the largest representable
/// kinetic energy. Values below `cap / 2` are untouched.
pub fn soft_cap(v: f64, cap: f64) -> f64 {
    let c0 = 0.5 * cap;
    if v <= c0 {
        v
    } else {
        let w = cap - c0;
        c0 + w * ((v - c0) / w).tanh()
    }
}

#[derive(Debug, Clone)]
pub struct GridHamiltonian {
    pub grid: Grid,
    pub potential: Vec<f64>,
    pub mass: f64,
    pub j: u32,
    kinetic: KineticOperator,
}

impl GridHamiltonian {
    /// `potential` holds the full diagonal, centrifugal term included.
    pub fn new(grid: Grid, potential: Vec<f64>, mass: f64, j: u32) -> Result<GridHamiltonian> {
        check_len(grid.n_points, potential.len())?;
        let kinetic = KineticOperator::new(grid, mass);
        Ok(GridHamiltonian { grid, potential, mass, j, kinetic })
    }

    /// Samples `pot` with its centrifugal term and caps it at the grid's
    /// kinetic maximum.
    pub fn from_channel(grid: Grid, pot: &ChannelPotential, j: u32, mass: f64) -> GridHamiltonian {
        let cap = grid.kinetic_max(mass);
        let v = pot.evaluate(&grid, j, mass).into_iter().map(|x| soft_cap(x, cap)).collect();
        let kinetic = KineticOperator::new(grid, mass);
        GridHamiltonian { grid, potential: v, mass, j, kinetic }
    }

    pub fn kinetic(&self) -> &KineticOperator {
        &self.kinetic
    }

    pub fn n(&self) -> usize {
        self.grid.n_points
    }

    /// out = H psi, using `scratch` for the FFT.
    pub fn apply_into(&self, psi: &[C64], out: &mut [C64], scratch: &mut [C64]) {
        out.copy_from_slice(psi);
        self.kinetic.apply_in_place(out, scratch);
        for ((o, p), v) in out.iter_mut().zip(psi).zip(&self.potential) {
            *o += p * v;
        }
    }

    pub fn apply(&self, psi: &[C64]) -> Result<Vec<C64>> {
        check_len(self.n(), psi.len())?;
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        let mut scratch = vec![C64::new(0.0, 0.0); self.kinetic.scratch_len()];
        self.apply_into(psi, &mut out, &mut scratch);
        Ok(out)
    }

    pub fn apply_real(&self, psi: &[f64]) -> Result<Vec<f64>> {
        let c: Vec<C64> = psi.iter().map(|&x| C64::new(x, 0.0)).collect();
        Ok(self.apply(&c)?.into_iter().map(|z| z.re).collect())
    }

    /// <psi|H|psi> with the grid measure dr.
    pub fn expectation(&self, psi: &[C64]) -> f64 {
        let h = self.apply(psi).expect("length checked by caller");
        psi.iter().zip(&h).map(|(a, b)| (a.conj() * b).re).sum::<f64>() * self.grid.dr
    }

    pub fn v_min(&self) -> f64 {
        self.potential.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn v_max(&self) -> f64 {
        self.potential.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lower and upper bounds of the discrete spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        (self.v_min(), self.v_max() + self.grid.kinetic_max(self.mass))
    }

    /// Dense matrix in column-major order.
    pub fn dense(&self) -> Array2<f64> {
        let n = self.n();
        let row = self.kinetic.matrix_row();
        let mut a = Array2::<f64>::zeros((n, n).f());
        for j in 0..n {
            for i in 0..n {
                let d = if i >= j { i - j } else { n + i - j };
                a[[i, j]] = row[d];
            }
            a[[j, j]] += self.potential[j];
        }
        a
    }
}

/// Sign changes of `psi`, ignoring samples below `1e-5` of the peak.
pub fn node_count(psi: &[f64]) -> usize {
    let peak = psi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let thresh = 1e-5 * peak;
    let mut last = 0.0;
    let mut nodes = 0;
    for &x in psi {
        if x.abs() <= thresh {
            continue;
        }
        if last != 0.0 && (x > 0.0) != (last > 0.0) {
            nodes += 1;
        }
        last = x;
    }
    nodes
}

/// Largest per-point density at either grid edge.
pub fn edge_density(psi: &[C64]) -> f64 {
    match (psi.first(), psi.last()) {
        (Some(a), Some(b)) => a.norm_sqr().max(b.norm_sqr()),
        _ => 0.0,
    }
}

pub const EDGE_DENSITY_WARN: f64 = 1e-8;

pub fn norm_sqr(psi: &[C64], dr: f64) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * dr
}
