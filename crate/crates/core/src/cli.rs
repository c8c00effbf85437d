//! Command-line front end and the end-to-end pump-probe pipeline.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{InitialKind, RunConfig, ScanPoint};
use crate::dynamics::{pump_manifold, ChebyshevPropagator, ChebyshevWork, Manifold, ManifoldState, PairState};
use crate::error::{Error, Result};
use crate::grid::{eigensolve_interval, write_eigen_csv, write_wavefunction_blob, GridHamiltonian};
use crate::probe::{
    amplitude_map, bleach_analysis, transient_signal, write_map_csv, BleachAnalysis, CheckpointSpec, InitialState,
    MapEntry, TransientSignal,
};
use crate::spectral::{bound_line_weight, harmonic_inversion, tag_line, write_lines_csv, Inversion};
use crate::states::{build_ensemble, find_resonances, scattering_state, NumerovOptions, ResonanceSearch, ThermalEnsemble};
use crate::units::{au_to_cm1, cm1_to_au, ps_to_au, Quantity, Unit};
use crate::C64;

#[derive(Debug, Parser)]
#[command(name = "pairprobe", version, about = "Pump-probe simulation of ultracold atom pairs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the machine parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound levels of one channel.
    Eigen(RunArgs),
    /// Shape resonances from phase-shift scans.
    Resonances(RunArgs),
    /// Thermal ensemble members and weights.
    Ensemble(RunArgs),
    /// Full pipeline: transient signal, spectral lines and summary.
    PumpProbe {
        #[command(flatten)]
        run: RunArgs,
        /// Write a state checkpoint every this many ps of delay.
        #[arg(long)]
        checkpoint_every: Option<f64>,
    },
    /// Harmonic inversion of a transient-signal CSV.
    Spectrum {
        #[command(flatten)]
        run: RunArgs,
        /// Signal CSV as written by `pump-probe`.
        #[arg(long)]
        input: PathBuf,
    },
    /// Pair-density estimate versus probe detuning.
    Map(RunArgs),
    /// Convert a value between units, e.g. `convert-units 1.5 cm-1 GHz`.
    ConvertUnits { value: f64, from: String, to: String },
}

/// Exit code for an error: 2 for configuration problems, 3 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        2
    } else {
        3
    }
}

extern "C" {
    fn openblas_set_num_threads(n: std::os::raw::c_int);
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cmd: Command) -> Result<()> {
    // Dense LAPACK calls stay single-threaded so results do not depend on
    // the BLAS thread count.
    unsafe { openblas_set_num_threads(1) };
    match cmd {
        Command::ConvertUnits { value, from, to } => {
            let from: Unit = from.parse()?;
            let to: Unit = to.parse()?;
            let q = Quantity::new(value, from).to(to)?;
            println!("{} {}", q.value, q.unit);
            Ok(())
        }
        Command::Eigen(a) => with_run(&a, |cfg, out| run_eigen(cfg, out)),
        Command::Resonances(a) => with_run(&a, |cfg, out| run_resonances(cfg, out)),
        Command::Ensemble(a) => with_run(&a, |cfg, out| run_ensemble(cfg, out)),
        Command::PumpProbe { run, checkpoint_every } => with_run(&run, |cfg, out| {
            let a = run_pipeline(cfg, out, checkpoint_every)?;
            print!("{}", a.summary);
            Ok(())
        }),
        Command::Spectrum { run, input } => with_run(&run, |cfg, out| run_spectrum(cfg, out, &input)),
        Command::Map(a) => with_run(&a, |cfg, out| run_map(cfg, out).map(|_| ())),
    }
}

fn with_run(a: &RunArgs, f: impl FnOnce(&RunConfig, &Path) -> Result<()> + Send) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &a.out {
        cfg.output.dir = o.clone();
    }
    let out = cfg.output.dir.clone();
    std::fs::create_dir_all(&out)?;
    match a.threads {
        Some(0) => Err(Error::config("--threads", "must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config("--threads", e.to_string()))?;
            pool.install(|| f(&cfg, &out))
        }
        None => f(&cfg, &out),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn run_eigen(cfg: &RunConfig, out: &Path) -> Result<()> {
    let e = &cfg.eigen;
    let grid = cfg.grid()?;
    let pot = cfg.potentials.channel(e.channel);
    let h = GridHamiltonian::from_channel(grid.clone(), pot, e.j, cfg.grid.mass);
    let lo = match e.e_min_cm1 {
        Some(x) => pot.asymptote + cm1_to_au(x),
        None => h.v_min(),
    };
    let hi = pot.asymptote + cm1_to_au(e.e_max_cm1);
    if !(hi > lo) {
        return Err(Error::config("eigen.e_max_cm1", "must lie above eigen.e_min_cm1"));
    }
    let pairs = eigensolve_interval(&h, lo, hi).map_err(|e| e.in_module("grid"))?;
    let stem = format!("eigen_{}_J{}", e.channel.label(), e.j);
    write_eigen_csv(create(&out.join(format!("{stem}.csv")))?, &cfg.hash(), &pairs)?;
    if e.write_wavefunctions {
        for (v, p) in pairs.iter().enumerate() {
            write_wavefunction_blob(&out.join(format!("{stem}_v{v:03}.bin")), &grid, &p.psi)?;
        }
    }
    println!("{} levels written to {}", pairs.len(), out.join(format!("{stem}.csv")).display());
    Ok(())
}

pub fn run_resonances(cfg: &RunConfig, out: &Path) -> Result<()> {
    let r = &cfg.resonances;
    let search = ResonanceSearch { e_min_uk: r.e_min_uk, e_max_uk: r.e_max_uk, samples: r.samples, ..Default::default() };
    let opts = NumerovOptions { step: r.step_bohr, ..Default::default() };
    let table = find_resonances(cfg.potentials.channel(r.channel), cfg.grid.mass, &r.j, &search, &opts)
        .map_err(|e| e.in_module("states"))?;
    table.write_csv(create(&out.join("resonances.csv"))?, &cfg.hash())?;
    for row in &table.rows {
        println!("J={} E={:.2} uK width={:.2} uK", row.j, row.energy_uk, row.width_uk);
    }
    Ok(())
}

fn ensembles(cfg: &RunConfig) -> Result<Vec<(Manifold, ThermalEnsemble)>> {
    let grid = cfg.grid()?;
    let opts = cfg.ensemble_options();
    cfg.initial
        .manifolds
        .iter()
        .map(|&m| {
            let ms = cfg.potentials.manifold(m);
            build_ensemble(&grid, &ms.ground, cfg.grid.mass, &opts).map(|e| (m, e)).map_err(|e| e.in_module("states"))
        })
        .collect()
}

pub fn run_ensemble(cfg: &RunConfig, out: &Path) -> Result<()> {
    for (m, ens) in ensembles(cfg)? {
        ens.write_csv(create(&out.join(format!("ensemble_{}.csv", m.label())))?, &cfg.hash())?;
        println!("{}: {} members, coverage {:.6}", m.label(), ens.members.len(), ens.coverage);
    }
    Ok(())
}

/// Box scattering state of every configured manifold at the pure target energy.
pub fn pure_state(cfg: &RunConfig) -> Result<PairState> {
    let grid = cfg.grid()?;
    let psi = |m: Manifold| -> Result<Vec<f64>> {
        let ms = cfg.potentials.manifold(m);
        let h = GridHamiltonian::from_channel(grid.clone(), &ms.ground, 0, cfg.grid.mass);
        Ok(scattering_state(&h, cfg.initial.energy_uk).map_err(|e| e.in_module("states"))?.psi)
    };
    let ms = &cfg.initial.manifolds;
    if ms.len() == 2 {
        PairState::two_manifold(grid.clone(), &psi(Manifold::Triplet)?, &psi(Manifold::Singlet)?, cfg.initial.triplet_weight)
    } else {
        PairState::single(grid.clone(), ms[0], &psi(ms[0])?)
    }
}

/// Bound J=0 levels (cm^-1 below threshold) of each manifold's ground channel
/// down to the upper edge of the spectral band; used to tag lines.
pub fn tag_levels(cfg: &RunConfig) -> Result<Vec<(Manifold, Vec<f64>)>> {
    let grid = cfg.grid()?;
    let depth = cm1_to_au(cfg.spectral.band_cm1[1]);
    cfg.initial
        .manifolds
        .iter()
        .map(|&m| {
            let ms = cfg.potentials.manifold(m);
            let h = GridHamiltonian::from_channel(grid.clone(), &ms.ground, 0, cfg.grid.mass);
            let a = ms.ground.asymptote;
            let lv = eigensolve_interval(&h, a - depth, a).map_err(|e| e.in_module("grid"))?;
            Ok((m, lv.iter().map(|p| au_to_cm1(p.energy - a)).collect()))
        })
        .collect()
}

/// Outputs of one scan point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub point: ScanPoint,
    pub signal: TransientSignal,
    pub analysis: BleachAnalysis,
    pub manifold_analysis: Vec<(Manifold, BleachAnalysis)>,
    /// Inversion of the total signal.
    pub inversion: Option<Inversion>,
    /// Inversion of each manifold's own signal.
    pub manifold_inversions: Vec<(Manifold, Option<Inversion>)>,
}

impl PointResult {
    /// Sum over manifolds of the bound-line weight of each manifold's own
    /// lines against its own levels.
    pub fn bound_line_weight(&self, levels: &[(Manifold, Vec<f64>)], tol: f64, min_confidence: f64) -> f64 {
        self.manifold_inversions
            .iter()
            .filter_map(|(m, inv)| {
                let lv = &levels.iter().find(|(k, _)| k == m)?.1;
                Some(inv.as_ref().map_or(0.0, |i| bound_line_weight(&i.lines, lv, tol, min_confidence)))
            })
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct Artifacts {
    pub points: Vec<PointResult>,
    pub map: Option<Vec<MapEntry>>,
    pub levels: Vec<(Manifold, Vec<f64>)>,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// Initial state, pump, delay scan, probe and inversion for every scan point.
pub fn run_pipeline(cfg: &RunConfig, out: &Path, checkpoint_every_ps: Option<f64>) -> Result<Artifacts> {
    cfg.validate()?;
    if let Some(x) = checkpoint_every_ps {
        if !(x > 0.0) {
            return Err(Error::config("--checkpoint-every", "must be positive"));
        }
    }
    std::fs::create_dir_all(out)?;
    let hash = cfg.hash();
    let delays = cfg.delay_list();
    let points = cfg.scan_points()?;

    let pure;
    let ens;
    let initial = match cfg.initial.kind {
        InitialKind::Pure => {
            pure = pure_state(cfg)?;
            InitialState::Pure(&pure)
        }
        InitialKind::Thermal => {
            ens = ensembles(cfg)?;
            InitialState::Ensemble(ens.iter().map(|(m, e)| (*m, cfg.initial.weight(*m), e)).collect())
        }
    };
    let levels = if cfg.spectral.max_lines > 0 { tag_levels(cfg)? } else { Vec::new() };

    let results: Vec<Result<PointResult>> = points
        .par_iter()
        .map(|p| {
            let mut setup = cfg.probe_setup(p.pump, p.probe)?;
            if let Some(every_ps) = checkpoint_every_ps {
                setup.checkpoint = Some(CheckpointSpec { every_ps, dir: out.join("checkpoints").join(&p.label) });
            }
            let mut signal = transient_signal(&setup, &initial, &delays).map_err(|e| e.in_module("probe"))?;
            signal.config_hash = hash.clone();
            let s = signal.normalized();
            let tau = p.probe.fwhm_ps;
            let analysis = bleach_analysis(&delays, &s, tau).map_err(|e| e.in_module("probe"))?;
            let mut manifold_analysis = Vec::new();
            let mut manifold_inversions = Vec::new();
            for m in &signal.manifolds {
                let v: Vec<f64> = m.values.iter().map(|x| x / m.baseline).collect();
                manifold_analysis.push((m.manifold, bleach_analysis(&delays, &v, tau)?));
                manifold_inversions.push((m.manifold, invert(cfg, &delays, &v).map_err(|e| e.in_module("spectral"))?));
            }
            let inversion = invert(cfg, &delays, &s).map_err(|e| e.in_module("spectral"))?;
            Ok(PointResult { point: p.clone(), signal, analysis, manifold_analysis, inversion, manifold_inversions })
        })
        .collect();
    let points: Vec<PointResult> = results.into_iter().collect::<Result<_>>()?;

    let mut files = Vec::new();
    for r in &points {
        let path = out.join(format!("{}.csv", r.point.label));
        r.signal.write_csv(create(&path)?)?;
        files.push(path);
        let stem = r.point.label.replacen("signal", "lines", 1);
        let mut tables = vec![(stem.clone(), &r.inversion)];
        for (m, inv) in &r.manifold_inversions {
            tables.push((format!("{stem}_{}", m.label()), inv));
        }
        for (name, inv) in tables {
            let path = out.join(format!("{name}.csv"));
            let lines = inv.as_ref().map_or(&[][..], |i| &i.lines[..]);
            write_lines_csv(create(&path)?, &hash, lines)?;
            files.push(path);
        }
    }
    let map = if cfg.map.with_pump_probe {
        let entries = run_map(cfg, out)?;
        files.push(out.join("map.csv"));
        Some(entries)
    } else {
        None
    };
    let summary = summary(cfg, &hash, &points, &levels);
    std::fs::write(out.join("summary.txt"), &summary)?;
    files.push(out.join("summary.txt"));
    Ok(Artifacts { points, map, levels, summary, files })
}

/// Harmonic inversion of a normalized signal; `None` when the analysed part
/// carries no variation at all.
fn invert(cfg: &RunConfig, delays: &[f64], s: &[f64]) -> Result<Option<Inversion>> {
    let start = delays.partition_point(|&t| t < cfg.spectral.t_start_ps);
    let tail = &s[start..];
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if tail.is_empty() || hi - lo <= 1e-12 * hi.abs().max(lo.abs()) {
        return Ok(None);
    }
    harmonic_inversion(delays, s, &cfg.spectral.options()).map(Some)
}

fn write_lines(s: &mut String, cfg: &RunConfig, what: &str, inv: Option<&Inversion>, levels: &[(Manifold, Vec<f64>)]) {
    let Some(inv) = inv else {
        let _ = writeln!(s, "  {what}: no spectral lines (signal flat after {} ps)", cfg.spectral.t_start_ps);
        return;
    };
    let _ = writeln!(s, "  {what} lines (model order {}, residual {:.2e}):", inv.model_order, inv.residual);
    let _ = writeln!(s, "    {:>10} {:>10} {:>10} {:>6}  tag", "freq_cm1", "amplitude", "decay_cm1", "conf");
    for l in &inv.lines {
        let _ = writeln!(
            s,
            "    {:>10.5} {:>10.3e} {:>10.5} {:>6.3}  {}",
            l.frequency_cm1,
            l.amplitude,
            l.decay_cm1,
            l.confidence,
            line_tag(l.frequency_cm1, levels, cfg.spectral.match_tol_cm1)
        );
    }
}

fn line_tag(freq: f64, levels: &[(Manifold, Vec<f64>)], tol: f64) -> String {
    levels
        .iter()
        .filter_map(|(m, lv)| tag_line(freq, lv, tol, true).map(|(t, d)| (m, t, d)))
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .map_or_else(|| "-".to_string(), |(m, t, _)| format!("{} {t}", m.label()))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), |v| format!("{v:.1} ps"))
}

fn summary(cfg: &RunConfig, hash: &str, points: &[PointResult], levels: &[(Manifold, Vec<f64>)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "config_hash {hash}");
    for (m, lv) in levels {
        let list: Vec<String> = lv.iter().map(|e| format!("{e:.5}")).collect();
        let _ = writeln!(s, "{} bound levels within band (cm-1): {}", m.label(), list.join(" "));
    }
    for r in points {
        let a = &r.analysis;
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "[{}] detuning {} cm-1, pump peak field {:.4e} au",
            r.point.label,
            r.point.pump.detuning_cm1,
            r.point.pump.peak_field()
        );
        let _ = writeln!(s, "  S(0+) {:.4}  bleach depth {:.4}  contrast {:.4}", a.s_zero_plus, a.bleach_depth, a.contrast);
        let _ = writeln!(s, "  recovery maximum {}", fmt_opt(a.recovery_delay_ps));
        for (m, ma) in &r.manifold_analysis {
            let _ = writeln!(
                s,
                "  {}: S(0+) {:.4}  recovery maximum {}",
                m.label(),
                ma.s_zero_plus,
                fmt_opt(ma.recovery_delay_ps)
            );
        }
        let _ = writeln!(s, "  excited population after pump {:.4e}", r.signal.excited_population);
        for w in &r.signal.warnings {
            let _ = writeln!(s, "  warning: {w}");
        }
        write_lines(&mut s, cfg, "all manifolds", r.inversion.as_ref(), levels);
        for (m, inv) in &r.manifold_inversions {
            let own: Vec<(Manifold, Vec<f64>)> = levels.iter().filter(|(k, _)| k == m).cloned().collect();
            write_lines(&mut s, cfg, m.label(), inv.as_ref(), &own);
        }
        let _ = writeln!(
            s,
            "  bound-line weight {:.4}",
            r.bound_line_weight(levels, cfg.spectral.match_tol_cm1, cfg.spectral.min_confidence)
        );
    }
    s
}

pub fn run_spectrum(cfg: &RunConfig, out: &Path, input: &Path) -> Result<()> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| Error::config("--input", format!("cannot read {}: {e}", input.display())))?;
    let sig = TransientSignal::read_csv(&text).map_err(|e| e.in_module("probe"))?;
    let inv = harmonic_inversion(&sig.delays_ps, &sig.total, &cfg.spectral.options()).map_err(|e| e.in_module("spectral"))?;
    let hash = if sig.config_hash.is_empty() { cfg.hash() } else { sig.config_hash.clone() };
    write_lines_csv(create(&out.join("lines.csv"))?, &hash, &inv.lines)?;
    let levels = tag_levels(cfg)?;
    for l in &inv.lines {
        println!(
            "{:.5} cm-1  amplitude {:.3e}  decay {:.5}  confidence {:.3}  {}",
            l.frequency_cm1,
            l.amplitude,
            l.decay_cm1,
            l.confidence,
            line_tag(l.frequency_cm1, &levels, cfg.spectral.match_tol_cm1)
        );
    }
    Ok(())
}

pub fn run_map(cfg: &RunConfig, out: &Path) -> Result<Vec<MapEntry>> {
    let m = cfg.map.manifold;
    if cfg.map.detunings_cm1.is_empty() {
        return Err(Error::config("map.detunings_cm1", "no detunings given"));
    }
    let grid = cfg.grid()?;
    let ms = cfg.potentials.manifold(m);
    let probe = cfg.probe()?;
    let entries = match cfg.initial.kind {
        InitialKind::Pure => {
            let h = GridHamiltonian::from_channel(grid.clone(), &ms.ground, 0, cfg.grid.mass);
            let psi = scattering_state(&h, cfg.initial.energy_uk).map_err(|e| e.in_module("states"))?.psi;
            let mut psi: Vec<C64> = psi.iter().map(|&x| C64::new(x, 0.0)).collect();
            if let Some(d) = cfg.map.delay_ps {
                psi = delayed(cfg, &ms, psi, d)?;
            }
            amplitude_map(&grid, &psi, &ms, &probe, &cfg.map.detunings_cm1).map_err(|e| e.in_module("probe"))?
        }
        InitialKind::Thermal => {
            let ens = build_ensemble(&grid, &ms.ground, cfg.grid.mass, &cfg.ensemble_options())
                .map_err(|e| e.in_module("states"))?;
            let mut acc: Option<Vec<MapEntry>> = None;
            for mem in &ens.members {
                let psi: Vec<C64> = mem.psi.iter().map(|&x| C64::new(x, 0.0)).collect();
                let e = amplitude_map(&grid, &psi, &ms, &probe, &cfg.map.detunings_cm1).map_err(|e| e.in_module("probe"))?;
                match &mut acc {
                    None => {
                        acc = Some(
                            e.into_iter().map(|x| MapEntry { estimate: x.estimate.map(|v| v * mem.weight), ..x }).collect(),
                        )
                    }
                    Some(a) => {
                        for (t, x) in a.iter_mut().zip(e) {
                            t.estimate = t.estimate.zip(x.estimate).map(|(p, q)| p + mem.weight * q);
                        }
                    }
                }
            }
            acc.unwrap_or_default()
        }
    };
    write_map_csv(create(&out.join("map.csv"))?, &cfg.hash(), &entries)?;
    Ok(entries)
}

fn delayed(cfg: &RunConfig, ms: &crate::probe::ManifoldSetup, psi: Vec<C64>, delay_ps: f64) -> Result<Vec<C64>> {
    let grid = cfg.grid()?;
    let hams = ms.hamiltonians(&grid, 0, cfg.grid.mass);
    let pump = cfg.pump()?;
    let mut state = ManifoldState { manifold: ms.manifold, weight: 1.0, ground: psi, excited: None };
    let mut now = -pump.t_center_ps;
    if pump.peak_field() > 0.0 {
        pump_manifold(&mut state, &hams, &pump, &cfg.propagation, &mut |_, _, _| {}).map_err(|e| e.in_module("dynamics"))?;
        now = pump.support_ps().1 - pump.t_center_ps;
    }
    if delay_ps < now {
        return Err(Error::config("map.delay_ps", format!("must not fall inside the pump window (ends at {now} ps)")));
    }
    if delay_ps > now {
        let bounds = ChebyshevPropagator::bounds_for(&hams.ground, cfg.propagation.bound_margin);
        let prop = ChebyshevPropagator::new(bounds, ps_to_au(delay_ps - now), cfg.propagation.chebyshev_tol)?;
        prop.apply(&hams.ground, &mut state.ground, &mut ChebyshevWork::new()).map_err(|e| e.in_module("dynamics"))?;
    }
    Ok(state.ground)
}
