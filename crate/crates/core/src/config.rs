//! Run configuration: TOML in, canonical TOML out, SHA-256 of the canonical
//! form as the provenance hash stamped into every CSV.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{Manifold, PropagatorConfig};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potentials::{Channel, ChannelPotential, DipoleFunction};
use crate::probe::{delay_grid, ManifoldSetup, ProbeSetup};
use crate::pulses::{PulseSpec, PulseStrength, DEFAULT_SPOT_UM};
use crate::spectral::InversionOptions;
use crate::states::{EnsembleOptions, NumerovOptions, ResonanceSearch};
use crate::units::REDUCED_MASS_RB87;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
    /// Reduced mass in electron masses.
    pub mass: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { r_min: 3.0, r_max: 1500.0, n_points: 4096, mass: REDUCED_MASS_RB87 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialsConfig {
    pub triplet: ChannelPotential,
    pub singlet: ChannelPotential,
    pub zero_u_plus: ChannelPotential,
    pub zero_g_minus: ChannelPotential,
    pub dipole: DipoleFunction,
}

impl Default for PotentialsConfig {
    fn default() -> Self {
        PotentialsConfig {
            triplet: ChannelPotential::triplet(),
            singlet: ChannelPotential::singlet(),
            zero_u_plus: ChannelPotential::zero_u_plus(),
            zero_g_minus: ChannelPotential::zero_g_minus(),
            dipole: DipoleFunction::default(),
        }
    }
}

impl PotentialsConfig {
    pub fn channel(&self, c: Channel) -> &ChannelPotential {
        match c {
            Channel::ATriplet => &self.triplet,
            Channel::XSinglet => &self.singlet,
            Channel::ZeroUPlus => &self.zero_u_plus,
            Channel::ZeroGMinus => &self.zero_g_minus,
        }
    }

    pub fn manifold(&self, m: Manifold) -> ManifoldSetup {
        match m {
            Manifold::Triplet => ManifoldSetup {
                manifold: m,
                ground: self.triplet.clone(),
                excited: self.zero_u_plus.clone(),
                dipole: self.dipole.clone(),
            },
            Manifold::Singlet => ManifoldSetup {
                manifold: m,
                ground: self.singlet.clone(),
                excited: self.zero_g_minus.clone(),
                dipole: self.dipole.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseConfig {
    pub t_center_ps: f64,
    pub fwhm_ps: f64,
    pub detuning_cm1: f64,
    pub energy_nj: Option<f64>,
    pub peak_field_au: Option<f64>,
    pub spot_um: f64,
    pub chirp: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        PulseConfig {
            t_center_ps: 0.0,
            fwhm_ps: 10.0,
            detuning_cm1: -4.0,
            energy_nj: Some(1.5),
            peak_field_au: None,
            spot_um: DEFAULT_SPOT_UM,
            chirp: 0.0,
        }
    }
}

impl PulseConfig {
    pub fn to_spec(&self, section: &str) -> Result<PulseSpec> {
        let key = |k: &str| format!("{section}.{k}");
        if !(self.fwhm_ps > 0.0) {
            return Err(Error::config(key("fwhm_ps"), format!("must be positive, got {}", self.fwhm_ps)));
        }
        if !(self.spot_um > 0.0) {
            return Err(Error::config(key("spot_um"), format!("must be positive, got {}", self.spot_um)));
        }
        if self.chirp != 0.0 {
            return Err(Error::config(key("chirp"), "chirped pulses are not implemented"));
        }
        let strength = match (self.energy_nj, self.peak_field_au) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    key("energy_nj"),
                    format!("set only one of {} and {}", key("energy_nj"), key("peak_field_au")),
                ))
            }
            (None, None) => {
                return Err(Error::config(key("energy_nj"), "one of energy_nj or peak_field_au is required"))
            }
            (Some(e), None) if e >= 0.0 => PulseStrength::Energy { energy_nj: e, spot_um: self.spot_um },
            (Some(e), None) => return Err(Error::config(key("energy_nj"), format!("must be >= 0, got {e}"))),
            (None, Some(f)) if f >= 0.0 => PulseStrength::PeakField { peak_field_au: f },
            (None, Some(f)) => return Err(Error::config(key("peak_field_au"), format!("must be >= 0, got {f}"))),
        };
        Ok(PulseSpec {
            t_center_ps: self.t_center_ps,
            fwhm_ps: self.fwhm_ps,
            detuning_cm1: self.detuning_cm1,
            strength,
            chirp: self.chirp,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialKind {
    Pure,
    Thermal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub kind: InitialKind,
    /// Target collision energy of the pure state.
    pub energy_uk: f64,
    pub temperature_uk: f64,
    pub manifolds: Vec<Manifold>,
    /// Weight of the triplet manifold when both are present.
    pub triplet_weight: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            kind: InitialKind::Pure,
            energy_uk: 20.0,
            temperature_uk: 100.0,
            manifolds: vec![Manifold::Triplet, Manifold::Singlet],
            triplet_weight: 0.75,
        }
    }
}

impl InitialConfig {
    pub fn weight(&self, m: Manifold) -> f64 {
        if self.manifolds.len() == 1 {
            return 1.0;
        }
        match m {
            Manifold::Triplet => self.triplet_weight,
            Manifold::Singlet => 1.0 - self.triplet_weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub even_j_only: bool,
    pub j_max: u32,
    pub cutoff_uk: Option<f64>,
    pub min_coverage: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        let d = EnsembleOptions::default();
        EnsembleConfig { even_j_only: d.even_j_only, j_max: d.j_max, cutoff_uk: d.cutoff_uk, min_coverage: d.min_coverage }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelayConfig {
    pub max_ps: f64,
    pub step_ps: f64,
    /// Explicit delays; overrides `max_ps` / `step_ps` when non-empty.
    pub list_ps: Vec<f64>,
}

impl Default for DelayConfig {
    fn default() -> Self {
        DelayConfig { max_ps: 2000.0, step_ps: 2.0, list_ps: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    pub band_cm1: [f64; 2],
    pub max_lines: usize,
    pub model_order: Option<usize>,
    pub t_start_ps: f64,
    pub amplitude_floor: f64,
    pub match_tol_cm1: f64,
    /// Lines below this confidence do not count toward the bound-line weight.
    pub min_confidence: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            band_cm1: [0.0, 5.0],
            max_lines: 20,
            model_order: None,
            t_start_ps: 200.0,
            amplitude_floor: 1e-3,
            match_tol_cm1: 0.05,
            min_confidence: 0.5,
        }
    }
}

impl SpectralConfig {
    pub fn options(&self) -> InversionOptions {
        InversionOptions {
            band_cm1: (self.band_cm1[0], self.band_cm1[1]),
            max_lines: self.max_lines,
            model_order: self.model_order,
            t_start_ps: self.t_start_ps,
            amplitude_floor: self.amplitude_floor,
            confidence: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonanceConfig {
    pub channel: Channel,
    pub j: Vec<u32>,
    pub e_min_uk: f64,
    pub e_max_uk: f64,
    pub samples: usize,
    pub step_bohr: f64,
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        let s = ResonanceSearch::default();
        ResonanceConfig {
            channel: Channel::ATriplet,
            j: vec![0, 2, 4],
            e_min_uk: s.e_min_uk,
            e_max_uk: s.e_max_uk,
            samples: s.samples,
            step_bohr: NumerovOptions::default().step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenConfig {
    pub channel: Channel,
    pub j: u32,
    /// Energy window in cm^-1; bound levels by default.
    pub e_min_cm1: Option<f64>,
    pub e_max_cm1: f64,
    pub write_wavefunctions: bool,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig { channel: Channel::ATriplet, j: 0, e_min_cm1: None, e_max_cm1: 0.0, write_wavefunctions: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapConfig {
    pub manifold: Manifold,
    pub detunings_cm1: Vec<f64>,
    /// Delay after the pump at which the map is taken; `None` maps the initial state.
    pub delay_ps: Option<f64>,
    /// Also write the map from `pump-probe`.
    pub with_pump_probe: bool,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig {
            manifold: Manifold::Triplet,
            detunings_cm1: (0..=40).map(|i| -2.0 - 0.5 * i as f64).collect(),
            delay_ps: None,
            with_pump_probe: false,
        }
    }
}

/// Parameter lists fanned out into independent pump-probe runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    /// Pump and probe detunings; empty means the `pulse` value only.
    pub detuning_cm1: Vec<f64>,
    /// Multipliers of the pump energy; the probe is left unchanged.
    pub energy_scale: Vec<f64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { detuning_cm1: Vec::new(), energy_scale: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Always true: outputs depend on the config only.
    pub deterministic: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), deterministic: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub potentials: PotentialsConfig,
    pub pulse: PulseConfig,
    /// Probe parameters; identical to the pump when absent.
    pub probe: Option<PulseConfig>,
    pub initial: InitialConfig,
    pub ensemble: EnsembleConfig,
    pub delays: DelayConfig,
    pub propagation: PropagatorConfig,
    pub spectral: SpectralConfig,
    pub resonances: ResonanceConfig,
    pub eigen: EigenConfig,
    pub map: MapConfig,
    pub scan: ScanConfig,
    pub output: OutputConfig,
}

/// One pump-probe run of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub label: String,
    pub pump: PulseSpec,
    pub probe: PulseSpec,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let key = e.span().map(|s| snippet(text, s)).unwrap_or_default();
            Error::config(key, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_toml(&text)
    }

    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hash of the physics; the output location does not enter.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        hex::encode(Sha256::digest(c.canonical().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !g.n_points.is_power_of_two() || g.n_points < 2 {
            return Err(Error::config("grid.n_points", format!("must be a power of two, got {}", g.n_points)));
        }
        if !(g.r_min >= 0.0 && g.r_max > g.r_min) {
            return Err(Error::config("grid.r_max", format!("need 0 <= r_min < r_max, got {} / {}", g.r_min, g.r_max)));
        }
        if !(g.mass > 0.0) {
            return Err(Error::config("grid.mass", "must be positive"));
        }
        for (name, p) in [
            ("triplet", &self.potentials.triplet),
            ("singlet", &self.potentials.singlet),
            ("zero_u_plus", &self.potentials.zero_u_plus),
            ("zero_g_minus", &self.potentials.zero_g_minus),
        ] {
            p.validate().map_err(|e| Error::config(format!("potentials.{name}"), e.to_string()))?;
        }
        self.potentials.dipole.validate().map_err(|e| Error::config("potentials.dipole", e.to_string()))?;
        self.pulse.to_spec("pulse")?;
        if let Some(p) = &self.probe {
            p.to_spec("probe")?;
        }
        let i = &self.initial;
        if i.manifolds.is_empty() {
            return Err(Error::config("initial.manifolds", "at least one manifold is required"));
        }
        if !(0.0..=1.0).contains(&i.triplet_weight) {
            return Err(Error::config("initial.triplet_weight", "must lie in [0, 1]"));
        }
        if !(i.energy_uk > 0.0) {
            return Err(Error::config("initial.energy_uk", "must be positive"));
        }
        if !(i.temperature_uk > 0.0) {
            return Err(Error::config("initial.temperature_uk", "must be positive"));
        }
        let d = &self.delays;
        if d.list_ps.is_empty() && !(d.step_ps > 0.0 && d.max_ps >= 0.0) {
            return Err(Error::config("delays.step_ps", "need step_ps > 0 and max_ps >= 0"));
        }
        crate::probe::validate_delays(&self.delay_list()).map_err(|e| Error::config("delays.list_ps", e.to_string()))?;
        let p = &self.propagation;
        if !(p.dt_pulse_ps > 0.0) {
            return Err(Error::config("propagation.dt_pulse_ps", "must be positive"));
        }
        if !(p.chebyshev_tol > 0.0 && p.bound_margin >= 0.0) {
            return Err(Error::config("propagation.chebyshev_tol", "tolerance must be positive, margin non-negative"));
        }
        let s = &self.spectral;
        if !(s.band_cm1[0] >= 0.0 && s.band_cm1[1] > s.band_cm1[0]) {
            return Err(Error::config("spectral.band_cm1", "need 0 <= lo < hi"));
        }
        if s.max_lines == 0 {
            return Err(Error::config("spectral.max_lines", "must be at least 1"));
        }
        if s.model_order == Some(0) {
            return Err(Error::config("spectral.model_order", "must be at least 1"));
        }
        let r = &self.resonances;
        if !(r.e_min_uk > 0.0 && r.e_max_uk > r.e_min_uk) || r.samples < 5 {
            return Err(Error::config("resonances.e_min_uk", "need 0 < e_min_uk < e_max_uk and samples >= 5"));
        }
        if self.map.delay_ps.is_some() && self.initial.kind == InitialKind::Thermal {
            return Err(Error::config("map.delay_ps", "delayed maps need a pure initial state"));
        }
        if self.scan.energy_scale.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::config("scan.energy_scale", "scales must be >= 0"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.r_min, self.grid.r_max, self.grid.n_points)
            .map_err(|e| Error::config("grid", e.to_string()))
    }

    pub fn pump(&self) -> Result<PulseSpec> {
        self.pulse.to_spec("pulse")
    }

    pub fn probe(&self) -> Result<PulseSpec> {
        match &self.probe {
            Some(p) => p.to_spec("probe"),
            None => self.pump(),
        }
    }

    pub fn delay_list(&self) -> Vec<f64> {
        if self.delays.list_ps.is_empty() {
            delay_grid(self.delays.max_ps, self.delays.step_ps)
        } else {
            self.delays.list_ps.clone()
        }
    }

    pub fn ensemble_options(&self) -> EnsembleOptions {
        EnsembleOptions {
            temperature_uk: self.initial.temperature_uk,
            cutoff_uk: self.ensemble.cutoff_uk,
            j_max: self.ensemble.j_max,
            even_j_only: self.ensemble.even_j_only,
            min_coverage: self.ensemble.min_coverage,
        }
    }

    pub fn probe_setup(&self, pump: PulseSpec, probe: PulseSpec) -> Result<ProbeSetup> {
        Ok(ProbeSetup {
            grid: self.grid()?,
            mass: self.grid.mass,
            manifolds: self.initial.manifolds.iter().map(|&m| self.potentials.manifold(m)).collect(),
            pump,
            probe,
            propagator: self.propagation,
            checkpoint: None,
        })
    }

    /// Cartesian product of the scan lists, detuning-major.
    pub fn scan_points(&self) -> Result<Vec<ScanPoint>> {
        let pump = self.pump()?;
        let probe = self.probe()?;
        let dets = if self.scan.detuning_cm1.is_empty() { vec![pump.detuning_cm1] } else { self.scan.detuning_cm1.clone() };
        let scales = if self.scan.energy_scale.is_empty() { vec![1.0] } else { self.scan.energy_scale.clone() };
        let single = dets.len() * scales.len() == 1;
        let mut out = Vec::new();
        for &d in &dets {
            for &s in &scales {
                let label = if single { "signal".to_string() } else { format!("signal_d{d}_x{s}") };
                out.push(ScanPoint {
                    label,
                    pump: PulseSpec { detuning_cm1: d, ..pump.scaled_energy(s) },
                    probe: PulseSpec { detuning_cm1: d, ..probe },
                });
            }
        }
        Ok(out)
    }
}

fn snippet(text: &str, span: std::ops::Range<usize>) -> String {
    // Report the enclosing line, which names the offending key.
    let start = text[..span.start.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let end = text[start..].find('\n').map_or(text.len(), |i| start + i);
    text[start..end].trim().to_string()
}
