//! Python bindings for pairprobe.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pairprobe::config::RunConfig;
use pairprobe::dynamics::Manifold;
use pairprobe::grid::{eigensolve_interval, GridHamiltonian};
use pairprobe::potentials::{condon_radius, Channel};
use pairprobe::probe::{bleach_analysis, transient_signal, InitialState, TransientSignal};
use pairprobe::spectral::{harmonic_inversion, InversionOptions, SpectralLine};
use pairprobe::states::{find_resonances, phase_shift, NumerovOptions, ResonanceSearch};
use pairprobe::units::{au_to_cm1, cm1_to_au, uk_to_au, Quantity, Unit};
use pairprobe::{cli, pulses, Error};

fn py_err(e: Error) -> PyErr {
    if e.is_config() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn parse_channel(name: &str) -> PyResult<Channel> {
    match name {
        "a-triplet" | "triplet" => Ok(Channel::ATriplet),
        "X-singlet" | "singlet" => Ok(Channel::XSinglet),
        "0u+" => Ok(Channel::ZeroUPlus),
        "0g-" => Ok(Channel::ZeroGMinus),
        other => Err(PyValueError::new_err(format!("unknown channel `{other}`"))),
    }
}

fn parse_manifold(name: &str) -> PyResult<Manifold> {
    match name {
        "triplet" => Ok(Manifold::Triplet),
        "singlet" => Ok(Manifold::Singlet),
        other => Err(PyValueError::new_err(format!("unknown manifold `{other}`"))),
    }
}

/// Run configuration. Construct from TOML text or take the defaults.
#[pyclass(name = "RunConfig", from_py_object)]
#[derive(Clone)]
struct PyRunConfig {
    inner: RunConfig,
}

#[pymethods]
impl PyRunConfig {
    #[new]
    #[pyo3(signature = (toml = None))]
    fn new(toml: Option<&str>) -> PyResult<Self> {
        let inner = match toml {
            Some(t) => RunConfig::from_toml(t).map_err(py_err)?,
            None => RunConfig::default(),
        };
        Ok(PyRunConfig { inner })
    }

    fn to_toml(&self) -> String {
        self.inner.canonical()
    }

    fn hash(&self) -> String {
        self.inner.hash()
    }

    fn delays(&self) -> Vec<f64> {
        self.inner.delay_list()
    }
}

#[pyclass(name = "SpectralLine", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLine {
    #[pyo3(get)]
    frequency_cm1: f64,
    #[pyo3(get)]
    amplitude: f64,
    #[pyo3(get)]
    decay_cm1: f64,
    #[pyo3(get)]
    confidence: f64,
}

#[pymethods]
impl PyLine {
    fn __repr__(&self) -> String {
        format!(
            "SpectralLine(frequency_cm1={:.6}, amplitude={:.4e}, decay_cm1={:.5}, confidence={:.3})",
            self.frequency_cm1, self.amplitude, self.decay_cm1, self.confidence
        )
    }
}

impl From<&SpectralLine> for PyLine {
    fn from(l: &SpectralLine) -> Self {
        PyLine { frequency_cm1: l.frequency_cm1, amplitude: l.amplitude, decay_cm1: l.decay_cm1, confidence: l.confidence }
    }
}

/// Pump-probe transient signal, normalized to the no-pump baseline.
#[pyclass(name = "TransientSignal", frozen, skip_from_py_object)]
struct PySignal {
    inner: TransientSignal,
}

#[pymethods]
impl PySignal {
    #[getter]
    fn delays_ps(&self) -> Vec<f64> {
        self.inner.delays_ps.clone()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.normalized()
    }

    #[getter]
    fn excited_population(&self) -> f64 {
        self.inner.excited_population
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    /// Signal of one manifold normalized to its own baseline.
    fn manifold(&self, name: &str) -> PyResult<Vec<f64>> {
        let m = parse_manifold(name)?;
        let s = self
            .inner
            .manifold(m)
            .ok_or_else(|| PyValueError::new_err(format!("manifold `{name}` not in this signal")))?;
        Ok(s.values.iter().map(|v| v / s.baseline).collect())
    }

    /// (S(0+), recovery delay or None, contrast) with window width `tau_ps`.
    fn bleach(&self, tau_ps: f64) -> PyResult<(f64, Option<f64>, f64)> {
        let a = bleach_analysis(&self.inner.delays_ps, &self.inner.normalized(), tau_ps).map_err(py_err)?;
        Ok((a.s_zero_plus, a.recovery_delay_ps, a.contrast))
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.inner.write_csv(&mut buf).map_err(py_err)?;
        Ok(String::from_utf8(buf).expect("csv is utf-8"))
    }
}

/// Converts `value` from unit `src` to unit `dst`.
#[pyfunction]
fn convert(value: f64, src: &str, dst: &str) -> PyResult<f64> {
    let from: Unit = src.parse().map_err(py_err)?;
    let to: Unit = dst.parse().map_err(py_err)?;
    Ok(Quantity::new(value, from).to(to).map_err(py_err)?.value)
}

/// Spectral FWHM (cm^-1) of a transform-limited pulse.
#[pyfunction]
fn bandwidth(fwhm_ps: f64) -> f64 {
    pulses::bandwidth(fwhm_ps)
}

/// Outermost radius (bohr) where the excited-ground difference potential
/// matches the detuning, for the ground/excited pair of `manifold`.
#[pyfunction]
#[pyo3(signature = (detuning_cm1, manifold = "triplet", config = None))]
fn condon(detuning_cm1: f64, manifold: &str, config: Option<&PyRunConfig>) -> PyResult<Option<f64>> {
    let cfg = config.map_or_else(RunConfig::default, |c| c.inner.clone());
    let ms = cfg.potentials.manifold(parse_manifold(manifold)?);
    let grid = cfg.grid().map_err(py_err)?;
    Ok(condon_radius(&ms.excited, &ms.ground, cm1_to_au(detuning_cm1), &grid))
}

/// Bound levels (cm^-1 below threshold) of `channel` in partial wave `j`.
#[pyfunction]
#[pyo3(signature = (channel = "triplet", j = 0, config = None))]
fn bound_levels(py: Python<'_>, channel: &str, j: u32, config: Option<&PyRunConfig>) -> PyResult<Vec<f64>> {
    let cfg = config.map_or_else(RunConfig::default, |c| c.inner.clone());
    let pot = cfg.potentials.channel(parse_channel(channel)?).clone();
    let grid = cfg.grid().map_err(py_err)?;
    py.detach(|| {
        let h = GridHamiltonian::from_channel(grid, &pot, j, cfg.grid.mass);
        let pairs = eigensolve_interval(&h, h.v_min(), pot.asymptote)?;
        Ok(pairs.iter().map(|p| au_to_cm1(p.energy - pot.asymptote)).collect())
    })
    .map_err(py_err)
}

/// Absolute scattering phase shift (rad) at `energy_uk`.
#[pyfunction]
#[pyo3(signature = (energy_uk, j = 0, channel = "triplet", config = None))]
fn phase(energy_uk: f64, j: u32, channel: &str, config: Option<&PyRunConfig>) -> PyResult<f64> {
    let cfg = config.map_or_else(RunConfig::default, |c| c.inner.clone());
    let pot = cfg.potentials.channel(parse_channel(channel)?);
    phase_shift(pot, cfg.grid.mass, j, uk_to_au(energy_uk), &NumerovOptions::default()).map_err(py_err)
}

/// Shape resonances as (J, E_uK, width_uK) over `[e_min_uk, e_max_uk]`.
#[pyfunction]
#[pyo3(signature = (js, e_min_uk = 1.0, e_max_uk = 1000.0, samples = 400, channel = "triplet", config = None))]
fn resonances(
    py: Python<'_>,
    js: Vec<u32>,
    e_min_uk: f64,
    e_max_uk: f64,
    samples: usize,
    channel: &str,
    config: Option<&PyRunConfig>,
) -> PyResult<Vec<(u32, f64, f64)>> {
    let cfg = config.map_or_else(RunConfig::default, |c| c.inner.clone());
    let pot = cfg.potentials.channel(parse_channel(channel)?).clone();
    let search = ResonanceSearch { e_min_uk, e_max_uk, samples, ..Default::default() };
    let t = py
        .detach(|| find_resonances(&pot, cfg.grid.mass, &js, &search, &NumerovOptions::default()))
        .map_err(py_err)?;
    Ok(t.rows.iter().map(|r| (r.j, r.energy_uk, r.width_uk)).collect())
}

/// Pure-state pump-probe signal of `config` (its pump and probe pulses).
#[pyfunction]
fn pump_probe(py: Python<'_>, config: &PyRunConfig) -> PyResult<PySignal> {
    let cfg = config.inner.clone();
    let inner = py
        .detach(|| -> pairprobe::Result<TransientSignal> {
            let state = cli::pure_state(&cfg)?;
            let setup = cfg.probe_setup(cfg.pump()?, cfg.probe()?)?;
            let mut s = transient_signal(&setup, &InitialState::Pure(&state), &cfg.delay_list())?;
            s.config_hash = cfg.hash();
            Ok(s)
        })
        .map_err(py_err)?;
    Ok(PySignal { inner })
}

/// Matrix-pencil harmonic inversion of a uniformly sampled real signal.
#[pyfunction]
#[pyo3(signature = (t_ps, values, model_order = None, t_start_ps = 0.0, band_cm1 = (0.0, f64::INFINITY), max_lines = 20))]
fn invert(
    py: Python<'_>,
    t_ps: Vec<f64>,
    values: Vec<f64>,
    model_order: Option<usize>,
    t_start_ps: f64,
    band_cm1: (f64, f64),
    max_lines: usize,
) -> PyResult<Vec<PyLine>> {
    let opts = InversionOptions { band_cm1, max_lines, model_order, t_start_ps, ..Default::default() };
    let inv = py.detach(|| harmonic_inversion(&t_ps, &values, &opts)).map_err(py_err)?;
    Ok(inv.lines.iter().map(PyLine::from).collect())
}

#[pymodule]
fn pairprobe_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRunConfig>()?;
    m.add_class::<PyLine>()?;
    m.add_class::<PySignal>()?;
    m.add_function(wrap_pyfunction!(convert, m)?)?;
    m.add_function(wrap_pyfunction!(bandwidth, m)?)?;
    m.add_function(wrap_pyfunction!(condon, m)?)?;
    m.add_function(wrap_pyfunction!(bound_levels, m)?)?;
    m.add_function(wrap_pyfunction!(phase, m)?)?;
    m.add_function(wrap_pyfunction!(resonances, m)?)?;
    m.add_function(wrap_pyfunction!(pump_probe, m)?)?;
    m.add_function(wrap_pyfunction!(invert, m)?)?;
    Ok(())
}
