//! Time propagation of pair wavefunctions.
//!
//! During a pulse the ground and excited channels of each spin manifold are
//! coupled in the rotating-wave approximation,
//!
//! ```text
//! H = [[T + V_g,        mu E(t) / 2 ],
//!      [mu E(t) / 2,    T + V_e - Delta_L]]
//! ```
//!
//! and advanced with a Strang split whose potential part is the exact 2x2
//! exponential at every grid point. Field-free stretches use a Chebyshev
//! expansion of exp(-i H_g t).

mod chebyshev;
mod checkpoint;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{check_len, Grid, GridHamiltonian};
use crate::pulses::PulseSpec;
use crate::units::{au_to_ps, ps_to_au};
use crate::C64;

pub use chebyshev::{bessel_j_all, ChebyshevPropagator, ChebyshevWork};
pub use checkpoint::{read_checkpoint, write_checkpoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manifold {
    Triplet,
    Singlet,
}

impl Manifold {
    pub fn label(self) -> &'static str {
        match self {
            Manifold::Triplet => "triplet",
            Manifold::Singlet => "singlet",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldState {
    pub manifold: Manifold,
    pub weight: f64,
    pub ground: Vec<C64>,
    pub excited: Option<Vec<C64>>,
}

impl ManifoldState {
    pub fn norm(&self, dr: f64) -> f64 {
        let g: f64 = self.ground.iter().map(|z| z.norm_sqr()).sum();
        let e: f64 = self.excited.as_ref().map_or(0.0, |v| v.iter().map(|z| z.norm_sqr()).sum());
        (g + e) * dr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    pub grid: Grid,
    pub time_ps: f64,
    pub manifolds: Vec<ManifoldState>,
}

impl PairState {
    /// Single-manifold state from a real wavefunction.
    pub fn single(grid: Grid, manifold: Manifold, psi: &[f64]) -> Result<PairState> {
        check_len(grid.n_points, psi.len())?;
        Ok(PairState {
            grid,
            time_ps: 0.0,
            manifolds: vec![ManifoldState {
                manifold,
                weight: 1.0,
                ground: psi.iter().map(|&x| C64::new(x, 0.0)).collect(),
                excited: None,
            }],
        })
    }

    /// Triplet and singlet manifolds with weights `w_t` and 1 - `w_t`.
    pub fn two_manifold(grid: Grid, triplet: &[f64], singlet: &[f64], w_t: f64) -> Result<PairState> {
        check_len(grid.n_points, triplet.len())?;
        check_len(grid.n_points, singlet.len())?;
        if !(0.0..=1.0).contains(&w_t) {
            return Err(Error::Precondition(format!("manifold weight {w_t} outside [0, 1]")));
        }
        let mk = |m, w, psi: &[f64]| ManifoldState {
            manifold: m,
            weight: w,
            ground: psi.iter().map(|&x| C64::new(x, 0.0)).collect(),
            excited: None,
        };
        Ok(PairState {
            grid,
            time_ps: 0.0,
            manifolds: vec![mk(Manifold::Triplet, w_t, triplet), mk(Manifold::Singlet, 1.0 - w_t, singlet)],
        })
    }

    /// Sum over manifolds and channels of the integrated density.
    pub fn norm(&self) -> f64 {
        self.manifolds.iter().map(|m| m.norm(self.grid.dr)).sum()
    }

    pub fn manifold(&self, m: Manifold) -> Option<&ManifoldState> {
        self.manifolds.iter().find(|s| s.manifold == m)
    }

    /// Drops excited amplitudes; returns the excited population per manifold.
    pub fn drop_excited(&mut self) -> Vec<f64> {
        let dr = self.grid.dr;
        self.manifolds
            .iter_mut()
            .map(|m| m.excited.take().map_or(0.0, |e| e.iter().map(|z| z.norm_sqr()).sum::<f64>() * dr))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagatorConfig {
    /// Split-operator step during pulses (ps).
    pub dt_pulse_ps: f64,
    /// Chebyshev truncation threshold on |J_k|.
    pub chebyshev_tol: f64,
    /// Fractional widening of the Chebyshev spectral interval.
    pub bound_margin: f64,
    pub edge_warn: f64,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        PropagatorConfig { dt_pulse_ps: 0.0025, chebyshev_tol: 1e-15, bound_margin: 0.05, edge_warn: 1e-8 }
    }
}

/// Ground and excited channel Hamiltonians of one manifold plus the dipole.
#[derive(Debug, Clone)]
pub struct ManifoldHamiltonians {
    pub ground: GridHamiltonian,
    pub excited: GridHamiltonian,
    pub dipole: Vec<f64>,
}

/// Strang splitting for the two-channel RWA Hamiltonian on a fixed step.
pub struct SplitOperator<'a> {
    ham: &'a ManifoldHamiltonians,
    dt: f64,
    kin_half: Vec<C64>,
    phase: Vec<C64>,
    half_gap: Vec<f64>,
    scratch: Vec<C64>,
}

impl<'a> SplitOperator<'a> {
    /// `detuning` is Delta_L in hartree, `dt` in atomic time.
    pub fn new(ham: &'a ManifoldHamiltonians, detuning: f64, dt: f64) -> Result<SplitOperator<'a>> {
        let n = ham.ground.n();
        check_len(n, ham.excited.n())?;
        check_len(n, ham.dipole.len())?;
        let (glo, ghi) = ham.ground.spectral_bounds();
        let (elo, ehi) = ham.excited.spectral_bounds();
        let range = ghi.max(ehi - detuning) - glo.min(elo - detuning);
        if dt * range > std::f64::consts::PI {
            let suggest = au_to_ps(0.5 * std::f64::consts::PI / range);
            return Err(Error::TimeStep(
                format!("dt * spectral range = {:.3} exceeds pi", dt * range),
                suggest,
            ));
        }
        let scale = 1.0 / n as f64;
        let kin_half = ham
            .ground
            .kinetic()
            .energies()
            .iter()
            .map(|&t| C64::from_polar(scale, -0.5 * t * dt))
            .collect();
        let mut phase = Vec::with_capacity(n);
        let mut half_gap = Vec::with_capacity(n);
        for (a, b) in ham.ground.potential.iter().zip(&ham.excited.potential) {
            let b = b - detuning;
            phase.push(C64::from_polar(1.0, -0.5 * (a + b) * dt));
            half_gap.push(0.5 * (a - b));
        }
        let scratch = vec![C64::new(0.0, 0.0); ham.ground.kinetic().scratch_len().max(1)];
        Ok(SplitOperator { ham, dt, kin_half, phase, half_gap, scratch })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn kinetic_half(&mut self, psi: &mut [C64]) {
        let k = self.ham.ground.kinetic();
        k.forward(psi, &mut self.scratch);
        for (p, f) in psi.iter_mut().zip(&self.kin_half) {
            *p *= f;
        }
        k.inverse(psi, &mut self.scratch);
    }

    /// One step with the field held at `field` (the midpoint value).
    pub fn step(&mut self, ground: &mut [C64], excited: &mut [C64], field: f64) {
        self.kinetic_half(ground);
        self.kinetic_half(excited);
        let dt = self.dt;
        let n = ground.len();
        for i in 0..n {
            let d = self.half_gap[i];
            let c = 0.5 * self.ham.dipole[i] * field;
            let w = (d * d + c * c).sqrt();
            let (s, co) = (w * dt).sin_cos();
            let sw = if w * dt > 1e-8 { s / w } else { dt };
            let ph = self.phase[i];
            let (g, e) = (ground[i], excited[i]);
            let mi = C64::new(0.0, -1.0);
            let g1 = g * C64::new(co, -sw * d) + e * (mi * (sw * c));
            let e1 = g * (mi * (sw * c)) + e * C64::new(co, sw * d);
            ground[i] = g1 * ph;
            excited[i] = e1 * ph;
        }
        self.kinetic_half(ground);
        self.kinetic_half(excited);
    }
}

/// One pulsed step of a whole manifold state at time `t_ps`.
pub fn step_pulsed(
    state: &mut ManifoldState,
    ham: &ManifoldHamiltonians,
    pulse: &PulseSpec,
    t_ps: f64,
    dt_ps: f64,
) -> Result<()> {
    pulse.validate()?;
    let (a, b) = pulse.support_ps();
    if t_ps < a - 1e-9 || t_ps + dt_ps > b + 1e-9 {
        return Err(Error::Precondition(format!("step [{t_ps}, {}] ps outside pulse support", t_ps + dt_ps)));
    }
    let mut sp = SplitOperator::new(ham, pulse.detuning_au(), ps_to_au(dt_ps))?;
    let n = state.ground.len();
    let excited = state.excited.get_or_insert_with(|| vec![C64::new(0.0, 0.0); n]);
    let field = pulse.envelope_au(ps_to_au(t_ps + 0.5 * dt_ps));
    sp.step(&mut state.ground, excited, field);
    Ok(())
}

/// Result of driving one manifold through the pump window.
#[derive(Debug, Clone)]
pub struct PumpReport {
    pub excited_population: f64,
    pub steps: usize,
    pub dt_ps: f64,
}

/// Drives `state` through [t_c - 4 tau, t_c + 4 tau]. `observe(k, t_ps, ground)`
/// runs before the first step (k = 0) and after every step k.
pub fn pump_manifold(
    state: &mut ManifoldState,
    ham: &ManifoldHamiltonians,
    pulse: &PulseSpec,
    cfg: &PropagatorConfig,
    observe: &mut dyn FnMut(usize, f64, &[C64]),
) -> Result<PumpReport> {
    pulse.validate()?;
    let (t0, t1) = pulse.support_ps();
    let steps = ((t1 - t0) / cfg.dt_pulse_ps).round().max(1.0) as usize;
    let dt_ps = (t1 - t0) / steps as f64;
    let n = state.ground.len();
    let mut excited = state.excited.take().unwrap_or_else(|| vec![C64::new(0.0, 0.0); n]);
    observe(0, t0, &state.ground);
    if pulse.peak_field() == 0.0 {
        let mut work = ChebyshevWork::new();
        let bounds = ChebyshevPropagator::bounds_for(&ham.ground, cfg.bound_margin);
        let prop = ChebyshevPropagator::new(bounds, ps_to_au(dt_ps), cfg.chebyshev_tol)?;
        for k in 1..=steps {
            prop.apply(&ham.ground, &mut state.ground, &mut work)?;
            observe(k, t0 + k as f64 * dt_ps, &state.ground);
        }
    } else {
        let mut sp = SplitOperator::new(ham, pulse.detuning_au(), ps_to_au(dt_ps))?;
        let t0_au = ps_to_au(t0);
        let dt_au = ps_to_au(dt_ps);
        for k in 0..steps {
            let field = pulse.envelope_au(t0_au + (k as f64 + 0.5) * dt_au);
            sp.step(&mut state.ground, &mut excited, field);
            observe(k + 1, t0 + (k + 1) as f64 * dt_ps, &state.ground);
        }
    }
    let pop = excited.iter().map(|z| z.norm_sqr()).sum::<f64>() * ham.ground.grid.dr;
    state.excited = Some(excited);
    Ok(PumpReport { excited_population: pop, steps, dt_ps })
}

/// Pumps every manifold, then drops the excited amplitudes.
pub fn pump(
    state: &mut PairState,
    pulse: &PulseSpec,
    hams: &[ManifoldHamiltonians],
    cfg: &PropagatorConfig,
) -> Result<Vec<PumpReport>> {
    if hams.len() != state.manifolds.len() {
        return Err(Error::LengthMismatch { expected: state.manifolds.len(), got: hams.len() });
    }
    let mut reports = Vec::with_capacity(hams.len());
    for (m, h) in state.manifolds.iter_mut().zip(hams) {
        reports.push(pump_manifold(m, h, pulse, cfg, &mut |_, _, _| {})?);
    }
    state.drop_excited();
    state.time_ps = pulse.support_ps().1;
    Ok(reports)
}

/// Field-free propagation of every manifold's ground channel by `dt_ps`.
pub fn propagate_free(
    state: &mut PairState,
    ground: &[GridHamiltonian],
    dt_ps: f64,
    cfg: &PropagatorConfig,
) -> Result<()> {
    if ground.len() != state.manifolds.len() {
        return Err(Error::LengthMismatch { expected: state.manifolds.len(), got: ground.len() });
    }
    let mut work = ChebyshevWork::new();
    for (m, h) in state.manifolds.iter_mut().zip(ground) {
        let bounds = ChebyshevPropagator::bounds_for(h, cfg.bound_margin);
        let prop = ChebyshevPropagator::new(bounds, ps_to_au(dt_ps), cfg.chebyshev_tol)?;
        prop.apply(h, &mut m.ground, &mut work)?;
        if let Some(e) = m.excited.as_mut() {
            e.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            m.excited = None;
        }
    }
    state.time_ps += dt_ps;
    Ok(())
}
