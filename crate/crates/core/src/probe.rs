//! Probe windows, transient absorption signals and amplitude maps.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::dynamics::{
    pump_manifold, write_checkpoint, ChebyshevPropagator, ChebyshevWork, Manifold, ManifoldHamiltonians,
    ManifoldState, PairState, PropagatorConfig,
};
use crate::error::{Error, Result};
use crate::grid::{check_len, edge_density, Grid, GridHamiltonian};
use crate::potentials::{condon_roots, difference_potential, Channel, ChannelPotential, DipoleFunction};
use crate::pulses::PulseSpec;
use crate::states::ThermalEnsemble;
use crate::units::ps_to_au;
use crate::C64;

/// Diagonal window operator W(r) = pi (tau E0)^2 exp(-2 Delta(r)^2 tau^2) mu(r)^2
/// with tau the probe FWHM.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowOperator {
    pub samples: Vec<f64>,
    pub tau_ps: f64,
    pub peak_field: f64,
    pub detuning_cm1: f64,
    pub ground: Channel,
    pub excited: Channel,
    pub dr: f64,
}

impl WindowOperator {
    /// <psi|W|psi> with the grid measure.
    pub fn expectation(&self, psi: &[C64]) -> f64 {
        psi.iter().zip(&self.samples).map(|(z, w)| z.norm_sqr() * w).sum::<f64>() * self.dr
    }

    pub fn expectation_real(&self, psi: &[f64]) -> f64 {
        psi.iter().zip(&self.samples).map(|(x, w)| x * x * w).sum::<f64>() * self.dr
    }

    pub fn integral(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.dr
    }

    /// Grid point with the largest W.
    pub fn peak_index(&self) -> usize {
        (0..self.samples.len()).max_by(|&a, &b| self.samples[a].total_cmp(&self.samples[b])).unwrap_or(0)
    }
}

pub fn build_window(
    probe: &PulseSpec,
    g: &ChannelPotential,
    e: &ChannelPotential,
    dipole: &DipoleFunction,
    grid: &Grid,
) -> Result<WindowOperator> {
    probe.validate()?;
    dipole.validate()?;
    if !(probe.detuning_cm1 < 0.0) {
        return Err(Error::Precondition(format!(
            "probe detuning must be negative (red of the atomic line), got {} cm-1",
            probe.detuning_cm1
        )));
    }
    let tau = probe.fwhm_au();
    let e0 = probe.peak_field();
    let delta = difference_potential(e, g, grid, probe.detuning_au());
    let mu = dipole.samples(grid);
    let pref = PI * (tau * e0).powi(2);
    let shape: Vec<f64> = delta.iter().zip(&mu).map(|(d, m)| (-2.0 * d * d * tau * tau).exp() * m * m).collect();
    let mu_max = mu.iter().fold(0.0f64, |a, &b| a.max(b));
    let open = shape[shape.len() - 1] / (mu_max * mu_max);
    if open >= 1e-3 {
        return Err(Error::Precondition(format!(
            "probe window is open at r_max (W(r_max)/W_max = {open:.3e}); use a larger |detuning| or a longer pulse"
        )));
    }
    Ok(WindowOperator {
        samples: shape.into_iter().map(|s| pref * s).collect(),
        tau_ps: probe.fwhm_ps,
        peak_field: e0,
        detuning_cm1: probe.detuning_cm1,
        ground: g.channel,
        excited: e.channel,
        dr: grid.dr,
    })
}

/// Potentials and dipole of one spin manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSetup {
    pub manifold: Manifold,
    pub ground: ChannelPotential,
    pub excited: ChannelPotential,
    pub dipole: DipoleFunction,
}

impl ManifoldSetup {
    pub fn triplet() -> Self {
        ManifoldSetup {
            manifold: Manifold::Triplet,
            ground: ChannelPotential::triplet(),
            excited: ChannelPotential::zero_u_plus(),
            dipole: DipoleFunction::default(),
        }
    }

    pub fn singlet() -> Self {
        ManifoldSetup {
            manifold: Manifold::Singlet,
            ground: ChannelPotential::singlet(),
            excited: ChannelPotential::zero_g_minus(),
            dipole: DipoleFunction::default(),
        }
    }

    pub fn hamiltonians(&self, grid: &Grid, j: u32, mass: f64) -> ManifoldHamiltonians {
        ManifoldHamiltonians {
            ground: GridHamiltonian::from_channel(grid.clone(), &self.ground, j, mass),
            excited: GridHamiltonian::from_channel(grid.clone(), &self.excited, j, mass),
            dipole: self.dipole.samples(grid),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckpointSpec {
    /// Delay interval between checkpoints (ps).
    pub every_ps: f64,
    pub dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct ProbeSetup {
    pub grid: Grid,
    pub mass: f64,
    pub manifolds: Vec<ManifoldSetup>,
    pub pump: PulseSpec,
    pub probe: PulseSpec,
    pub propagator: PropagatorConfig,
    pub checkpoint: Option<CheckpointSpec>,
}

impl ProbeSetup {
    pub fn manifold(&self, m: Manifold) -> Result<&ManifoldSetup> {
        self.manifolds
            .iter()
            .find(|s| s.manifold == m)
            .ok_or_else(|| Error::Precondition(format!("no potentials configured for the {} manifold", m.label())))
    }

    pub fn window(&self, m: Manifold) -> Result<WindowOperator> {
        let s = self.manifold(m)?;
        build_window(&self.probe, &s.ground, &s.excited, &s.dipole, &self.grid)
    }
}

pub enum InitialState<'a> {
    Pure(&'a PairState),
    /// One thermal ensemble per manifold with its manifold weight.
    Ensemble(Vec<(Manifold, f64, &'a ThermalEnsemble)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSignal {
    pub manifold: Manifold,
    pub weight: f64,
    pub values: Vec<f64>,
    /// No-pump window overlap.
    pub baseline: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientSignal {
    pub delays_ps: Vec<f64>,
    /// sum_m w_m S_m, in atomic units.
    pub total: Vec<f64>,
    pub baseline: f64,
    pub manifolds: Vec<ManifoldSignal>,
    /// Excited population left after the pump, weighted like the signal.
    pub excited_population: f64,
    pub warnings: Vec<String>,
    pub config_hash: String,
}

impl TransientSignal {
    pub fn manifold(&self, m: Manifold) -> Option<&ManifoldSignal> {
        self.manifolds.iter().find(|s| s.manifold == m)
    }

    /// Total signal divided by its no-pump baseline.
    pub fn normalized(&self) -> Vec<f64> {
        normalize(&self.total, self.baseline)
    }

    /// `delay_ps,S_total,S_triplet,S_singlet`, each normalized to its own
    /// no-pump baseline; absent manifolds are left empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# config_hash={}", self.config_hash)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["delay_ps", "S_total", "S_triplet", "S_singlet"])?;
        let total = self.normalized();
        let col = |m: Manifold| self.manifold(m).map(|s| normalize(&s.values, s.baseline));
        let (t, s) = (col(Manifold::Triplet), col(Manifold::Singlet));
        let fmt = |v: &Option<Vec<f64>>, i: usize| v.as_ref().map_or(String::new(), |v| format!("{:.15e}", v[i]));
        for (i, d) in self.delays_ps.iter().enumerate() {
            w.write_record([format!("{d:.6}"), format!("{:.15e}", total[i]), fmt(&t, i), fmt(&s, i)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<TransientSignal> {
        let mut hash = String::new();
        let mut body = String::new();
        for line in text.lines() {
            if let Some(h) = line.strip_prefix("# config_hash=") {
                hash = h.trim().to_string();
            } else if !line.starts_with('#') {
                body.push_str(line);
                body.push('\n');
            }
        }
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        let (mut delays, mut total) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Precondition(format!("bad number in column {i} of signal CSV")))
            };
            delays.push(parse(0)?);
            total.push(parse(1)?);
        }
        Ok(TransientSignal {
            delays_ps: delays,
            total,
            baseline: 1.0,
            manifolds: Vec::new(),
            excited_population: 0.0,
            warnings: Vec::new(),
            config_hash: hash,
        })
    }
}

fn normalize(v: &[f64], baseline: f64) -> Vec<f64> {
    if baseline > 0.0 {
        v.iter().map(|x| x / baseline).collect()
    } else {
        v.to_vec()
    }
}

pub fn validate_delays(delays_ps: &[f64]) -> Result<()> {
    if delays_ps.is_empty() {
        return Err(Error::Precondition("empty delay grid".into()));
    }
    if delays_ps[0] < 0.0 {
        return Err(Error::Precondition(format!("negative delay {} ps", delays_ps[0])));
    }
    if let Some(w) = delays_ps.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition(format!("delay grid is not increasing at {} -> {} ps", w[0], w[1])));
    }
    Ok(())
}

/// Uniform delay grid [0, max] in steps of `step` ps.
pub fn delay_grid(max_ps: f64, step_ps: f64) -> Vec<f64> {
    let n = (max_ps / step_ps).round() as usize;
    (0..=n).map(|i| i as f64 * step_ps).collect()
}

/// Result of pumping and probing a single wavefunction.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberSignal {
    pub values: Vec<f64>,
    pub baseline: f64,
    pub excited_population: f64,
    pub edge_density: f64,
}

/// Pumps `psi` (ground channel of `setup` in partial wave `j`) and samples
/// the probe window at each delay after the pump maximum.
pub fn member_signal(
    setup: &ProbeSetup,
    ms: &ManifoldSetup,
    j: u32,
    psi: &[C64],
    window: &WindowOperator,
    delays_ps: &[f64],
) -> Result<MemberSignal> {
    member_signal_inner(setup, ms, j, psi, window, delays_ps, None)
}

fn member_signal_inner(
    setup: &ProbeSetup,
    ms: &ManifoldSetup,
    j: u32,
    psi: &[C64],
    window: &WindowOperator,
    delays_ps: &[f64],
    checkpoint: Option<&CheckpointSpec>,
) -> Result<MemberSignal> {
    validate_delays(delays_ps)?;
    check_len(setup.grid.n_points, psi.len())?;
    let hams = ms.hamiltonians(&setup.grid, j, setup.mass);
    let cfg = &setup.propagator;
    let baseline = window.expectation(psi);
    let mut values = vec![f64::NAN; delays_ps.len()];
    let t_c = setup.pump.t_center_ps;
    let (t0, t1) = setup.pump.support_ps();
    let mut state = ManifoldState { manifold: ms.manifold, weight: 1.0, ground: psi.to_vec(), excited: None };
    let mut next = 0usize;
    let mut excited_population = 0.0;
    let mut now = t0 - t_c;
    if setup.pump.peak_field() > 0.0 {
        let half = 0.5 * cfg.dt_pulse_ps;
        let report = pump_manifold(&mut state, &hams, &setup.pump, cfg, &mut |_, t, ground| {
            let rel = t - t_c;
            while next < delays_ps.len() && delays_ps[next] <= rel + half {
                if (delays_ps[next] - rel).abs() <= half {
                    values[next] = window.expectation(ground);
                }
                next += 1;
            }
        })?;
        excited_population = report.excited_population;
        state.excited = None;
        now = t1 - t_c;
    }
    let mut props: HashMap<u64, ChebyshevPropagator> = HashMap::new();
    let bounds = ChebyshevPropagator::bounds_for(&hams.ground, cfg.bound_margin);
    let mut work = ChebyshevWork::new();
    let mut next_cp = 0.0;
    for i in 0..delays_ps.len() {
        if !values[i].is_nan() {
            continue;
        }
        let step = delays_ps[i] - now;
        if step > 0.0 {
            let key = step.to_bits();
            if !props.contains_key(&key) {
                props.insert(key, ChebyshevPropagator::new(bounds, ps_to_au(step), cfg.chebyshev_tol)?);
            }
            props[&key].apply(&hams.ground, &mut state.ground, &mut work)?;
            now = delays_ps[i];
        }
        values[i] = window.expectation(&state.ground);
        if let Some(c) = checkpoint {
            if c.every_ps > 0.0 && now >= next_cp {
                next_cp = ((now / c.every_ps).floor() + 1.0) * c.every_ps;
                let ps = PairState { grid: setup.grid.clone(), time_ps: t_c + now, manifolds: vec![state.clone()] };
                let name = format!("checkpoint_{}_{:06}.bin", ms.manifold.label(), i);
                write_checkpoint(&c.dir.join(name), &ps)?;
            }
        }
    }
    Ok(MemberSignal { values, baseline, excited_population, edge_density: edge_density(&state.ground) })
}

/// S(delay) = sum over manifolds (and ensemble members) of weight x
/// <psi_g(delay)|W|psi_g(delay)>. Members run in parallel; the reduction is
/// done afterwards in a fixed order.
pub fn transient_signal(setup: &ProbeSetup, initial: &InitialState, delays_ps: &[f64]) -> Result<TransientSignal> {
    validate_delays(delays_ps)?;
    setup.pump.validate()?;
    setup.probe.validate()?;
    struct Job<'a> {
        slot: usize,
        weight: f64,
        j: u32,
        psi: Vec<C64>,
        ms: &'a ManifoldSetup,
    }
    let mut slots: Vec<(Manifold, f64)> = Vec::new();
    let mut jobs = Vec::new();
    match initial {
        InitialState::Pure(state) => {
            if state.grid.n_points != setup.grid.n_points {
                return Err(Error::LengthMismatch { expected: setup.grid.n_points, got: state.grid.n_points });
            }
            for m in &state.manifolds {
                let ms = setup.manifold(m.manifold)?;
                jobs.push(Job { slot: slots.len(), weight: 1.0, j: 0, psi: m.ground.clone(), ms });
                slots.push((m.manifold, m.weight));
            }
        }
        InitialState::Ensemble(list) => {
            for (m, w, ens) in list {
                let ms = setup.manifold(*m)?;
                check_len(setup.grid.n_points, ens.grid.n_points)?;
                for mem in &ens.members {
                    let psi = mem.psi.iter().map(|&x| C64::new(x, 0.0)).collect();
                    jobs.push(Job { slot: slots.len(), weight: mem.weight, j: mem.j, psi, ms });
                }
                slots.push((*m, *w));
            }
        }
    }
    let windows: Vec<WindowOperator> = slots.iter().map(|(m, _)| setup.window(*m)).collect::<Result<_>>()?;
    let pure = matches!(initial, InitialState::Pure(_));
    if let Some(c) = &setup.checkpoint {
        std::fs::create_dir_all(&c.dir)?;
    }
    let results: Vec<Result<MemberSignal>> = jobs
        .par_iter()
        .map(|job| {
            let cp = if pure { setup.checkpoint.as_ref() } else { None };
            member_signal_inner(setup, job.ms, job.j, &job.psi, &windows[job.slot], delays_ps, cp)
        })
        .collect();
    let n = delays_ps.len();
    let mut manifolds: Vec<ManifoldSignal> = slots
        .iter()
        .map(|&(m, w)| ManifoldSignal { manifold: m, weight: w, values: vec![0.0; n], baseline: 0.0 })
        .collect();
    let mut warnings = Vec::new();
    let mut excited = 0.0;
    for (job, res) in jobs.iter().zip(results) {
        let r = res?;
        let slot = &mut manifolds[job.slot];
        for (acc, v) in slot.values.iter_mut().zip(&r.values) {
            *acc += job.weight * v;
        }
        slot.baseline += job.weight * r.baseline;
        excited += slot.weight * job.weight * r.excited_population;
        if r.edge_density > setup.propagator.edge_warn {
            warnings.push(format!(
                "{} J={} member: edge density {:.3e} exceeds {:.1e}; enlarge r_max",
                job.ms.manifold.label(),
                job.j,
                r.edge_density,
                setup.propagator.edge_warn
            ));
        }
    }
    let mut total = vec![0.0; n];
    let mut baseline = 0.0;
    for s in &manifolds {
        for (t, v) in total.iter_mut().zip(&s.values) {
            *t += s.weight * v;
        }
        baseline += s.weight * s.baseline;
    }
    Ok(TransientSignal {
        delays_ps: delays_ps.to_vec(),
        total,
        baseline,
        manifolds,
        excited_population: excited,
        warnings,
        config_hash: String::new(),
    })
}

/// Bleach and recovery figures of a signal normalized to baseline 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BleachAnalysis {
    /// S at delay = tau.
    pub s_zero_plus: f64,
    pub bleach_depth: f64,
    pub recovery_delay_ps: Option<f64>,
    pub recovery_value: Option<f64>,
    /// (max - min) / mean over all delays.
    pub contrast: f64,
}

/// S(0+) is read at delay = `tau_ps`. The recovery maximum is the first local
/// maximum of the signal smoothed with a Gaussian of width `tau_ps` that
/// reaches halfway from S(0+) to the largest later value.
pub fn bleach_analysis(delays_ps: &[f64], s: &[f64], tau_ps: f64) -> Result<BleachAnalysis> {
    check_len(delays_ps.len(), s.len())?;
    validate_delays(delays_ps)?;
    let n = s.len();
    let i0 = (0..n).min_by(|&a, &b| (delays_ps[a] - tau_ps).abs().total_cmp(&(delays_ps[b] - tau_ps).abs())).unwrap();
    let s0 = s[i0];
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let (mut num, mut den) = (0.0, 0.0);
            for k in 0..n {
                let x = (delays_ps[k] - delays_ps[i]) / tau_ps;
                if x.abs() < 5.0 {
                    let g = (-0.5 * x * x).exp();
                    num += g * s[k];
                    den += g;
                }
            }
            num / den
        })
        .collect();
    let later_max = smooth[i0..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let level = s0 + 0.5 * (later_max - s0);
    let mut recovery = None;
    for i in (i0 + 1)..n.saturating_sub(1) {
        if smooth[i] >= smooth[i - 1] && smooth[i] > smooth[i + 1] && smooth[i] >= level && smooth[i] > s0 {
            recovery = Some(i);
            break;
        }
    }
    let (min, max) = s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let mean = s.iter().sum::<f64>() / n as f64;
    Ok(BleachAnalysis {
        s_zero_plus: s0,
        bleach_depth: 1.0 - s0,
        recovery_delay_ps: recovery.map(|i| delays_ps[i]),
        recovery_value: recovery.map(|i| s[i]),
        contrast: (max - min) / mean,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapEntry {
    pub detuning_cm1: f64,
    /// Outermost Condon root; `None` flags a rootless or unusable frequency.
    pub r_star: Option<f64>,
    pub estimate: Option<f64>,
    pub note: Option<String>,
}

/// For each detuning, <psi|W|psi> / integral W dr at the Condon root.
pub fn amplitude_map(
    grid: &Grid,
    psi: &[C64],
    ms: &ManifoldSetup,
    template: &PulseSpec,
    detunings_cm1: &[f64],
) -> Result<Vec<MapEntry>> {
    check_len(grid.n_points, psi.len())?;
    let mut out = Vec::with_capacity(detunings_cm1.len());
    for &d in detunings_cm1 {
        let probe = PulseSpec { detuning_cm1: d, ..*template };
        let roots = condon_roots(&ms.excited, &ms.ground, probe.detuning_au(), grid.r_min, grid.r_max);
        let Some(&r_star) = roots.last() else {
            out.push(MapEntry { detuning_cm1: d, r_star: None, estimate: None, note: Some("no Condon root".into()) });
            continue;
        };
        match build_window(&probe, &ms.ground, &ms.excited, &ms.dipole, grid) {
            Ok(w) => {
                let norm = w.integral();
                out.push(MapEntry {
                    detuning_cm1: d,
                    r_star: Some(r_star),
                    estimate: if norm > 0.0 { Some(w.expectation(psi) / norm) } else { None },
                    note: None,
                });
            }
            Err(e) => out.push(MapEntry { detuning_cm1: d, r_star: Some(r_star), estimate: None, note: Some(e.to_string()) }),
        }
    }
    Ok(out)
}

/// `r_bohr,density_estimate,omega_p_cm1`; flagged entries are skipped.
pub fn write_map_csv<W: Write>(mut out: W, hash: &str, entries: &[MapEntry]) -> Result<()> {
    writeln!(out, "# config_hash={hash}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r_bohr", "density_estimate", "omega_p_cm1"])?;
    for e in entries {
        if let (Some(r), Some(x)) = (e.r_star, e.estimate) {
            w.write_record([format!("{r:.9}"), format!("{x:.15e}"), format!("{:.6}", e.detuning_cm1)])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Grid, ManifoldSetup, PulseSpec) {
        let grid = Grid::new(3.0, 1500.0, 4096).unwrap();
        (grid, ManifoldSetup::triplet(), PulseSpec::with_energy(0.0, 10.0, -4.0, 1.5, 566.0))
    }

    #[test]
    fn window_peak_and_e2_point() {
        let (grid, ms, p) = setup();
        let w = build_window(&p, &ms.ground, &ms.excited, &ms.dipole, &grid).unwrap();
        let wmax = PI * (p.fwhm_au() * p.peak_field()).powi(2) * 16.0;
        let k = w.peak_index();
        let d = difference_potential(&ms.excited, &ms.ground, &grid, p.detuning_au());
        for i in [k, k + 1, k.saturating_sub(1)] {
            let expected = wmax * (-2.0 * (d[i] * p.fwhm_au()).powi(2)).exp();
            assert!((w.samples[i] - expected).abs() <= 1e-12 * wmax);
        }
        assert!(w.samples.iter().all(|&x| x >= 0.0 && x <= wmax * (1.0 + 1e-12)));
        assert!(w.samples[k] > 0.99 * wmax);
    }

    #[test]
    fn open_window_rejected() {
        let (grid, ms, _) = setup();
        let p = PulseSpec::with_energy(0.0, 0.05, -0.5, 1.5, 566.0);
        let err = build_window(&p, &ms.ground, &ms.excited, &ms.dipole, &grid).unwrap_err();
        assert!(err.to_string().contains("larger |detuning|"));
        let blue = PulseSpec::with_energy(0.0, 10.0, 2.0, 1.5, 566.0);
        assert!(build_window(&blue, &ms.ground, &ms.excited, &ms.dipole, &grid).is_err());
    }

    #[test]
    fn non_monotone_delays_rejected() {
        assert!(validate_delays(&[0.0, 2.0, 2.0]).is_err());
        assert!(validate_delays(&[0.0, 4.0, 2.0]).is_err());
        assert!(validate_delays(&[-1.0, 2.0]).is_err());
        assert!(validate_delays(&[0.0, 2.0]).is_ok());
    }

    #[test]
    fn uniform_density_maps_flat() {
        let (grid, ms, p) = setup();
        let psi = vec![C64::new(0.3, 0.0); grid.n_points];
        let scan: Vec<f64> = (0..12).map(|i| -3.0 - 1.0 * i as f64).collect();
        let map = amplitude_map(&grid, &psi, &ms, &p, &scan).unwrap();
        for e in &map {
            let x = e.estimate.unwrap();
            assert!((x - 0.09).abs() < 0.01 * 0.09, "{e:?}");
        }
    }

    #[test]
    fn bleach_analysis_on_synthetic_dip() {
        let d: Vec<f64> = (0..1001).map(|i| i as f64 * 2.0).collect();
        let s: Vec<f64> = d
            .iter()
            .map(|&t| 1.0 - 0.6 * (-t / 100.0).exp() + 0.3 * (-((t - 500.0) / 80.0).powi(2)).exp())
            .collect();
        let a = bleach_analysis(&d, &s, 10.0).unwrap();
        assert!(a.s_zero_plus < 0.5);
        let r = a.recovery_delay_ps.unwrap();
        assert!((r - 500.0).abs() < 20.0, "{r}");
    }
}
