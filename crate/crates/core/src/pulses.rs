//! Transform-limited Gaussian pulses.
//!
//! The field envelope is E(t) = E0 exp(-2 ln2 (t - t_c)^2 / tau^2), so tau is
//! the FWHM of the intensity E^2.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{cm1_to_au, ps_to_au, AU_FIELD_V_PER_M, EPSILON_0, SPEED_OF_LIGHT};

/// Intensity time-bandwidth product of a transform-limited Gaussian, 2 ln2 / pi.
pub const TIME_BANDWIDTH: f64 = 2.0 * LN_2 / PI;

/// Spot diameter (um) at which 1.5 nJ gives pulse area pi with the default dipole.
pub const DEFAULT_SPOT_UM: f64 = 566.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseStrength {
    PeakField { peak_field_au: f64 },
    Energy { energy_nj: f64, spot_um: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub t_center_ps: f64,
    pub fwhm_ps: f64,
    /// Laser minus atomic frequency.
    pub detuning_cm1: f64,
    pub strength: PulseStrength,
    /// Reserved; must be zero.
    #[serde(default)]
    pub chirp: f64,
}

impl PulseSpec {
    pub fn with_energy(t_center_ps: f64, fwhm_ps: f64, detuning_cm1: f64, energy_nj: f64, spot_um: f64) -> Self {
        PulseSpec {
            t_center_ps,
            fwhm_ps,
            detuning_cm1,
            strength: PulseStrength::Energy { energy_nj, spot_um },
            chirp: 0.0,
        }
    }

    pub fn with_field(t_center_ps: f64, fwhm_ps: f64, detuning_cm1: f64, peak_field_au: f64) -> Self {
        PulseSpec {
            t_center_ps,
            fwhm_ps,
            detuning_cm1,
            strength: PulseStrength::PeakField { peak_field_au },
            chirp: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chirp != 0.0 {
            return Err(Error::Unimplemented("chirped pulses"));
        }
        if !(self.fwhm_ps > 0.0) {
            return Err(Error::Precondition(format!("pulse FWHM must be positive, got {}", self.fwhm_ps)));
        }
        match self.strength {
            PulseStrength::PeakField { peak_field_au } if peak_field_au < 0.0 || !peak_field_au.is_finite() => {
                Err(Error::Precondition("peak field must be finite and >= 0".into()))
            }
            PulseStrength::Energy { energy_nj, spot_um } if energy_nj < 0.0 || !(spot_um > 0.0) => {
                Err(Error::Precondition("pulse energy must be >= 0 and spot diameter > 0".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn peak_field(&self) -> f64 {
        match self.strength {
            PulseStrength::PeakField { peak_field_au } => peak_field_au,
            PulseStrength::Energy { energy_nj, spot_um } => peak_field_from_energy(energy_nj, spot_um, self.fwhm_ps),
        }
    }

    /// Copy with the pulse energy (or peak intensity) multiplied by `factor`.
    pub fn scaled_energy(&self, factor: f64) -> PulseSpec {
        let strength = match self.strength {
            PulseStrength::PeakField { peak_field_au } => {
                PulseStrength::PeakField { peak_field_au: peak_field_au * factor.sqrt() }
            }
            PulseStrength::Energy { energy_nj, spot_um } => {
                PulseStrength::Energy { energy_nj: energy_nj * factor, spot_um }
            }
        };
        PulseSpec { strength, ..*self }
    }

    pub fn envelope(&self, t_ps: f64) -> Result<f64> {
        if self.chirp != 0.0 {
            return Err(Error::Unimplemented("chirped pulses"));
        }
        Ok(self.envelope_au(ps_to_au(t_ps)))
    }

    /// Envelope at atomic time `t`.
    #[inline]
    pub fn envelope_au(&self, t: f64) -> f64 {
        let x = (t - self.t_center_au()) / self.fwhm_au();
        self.peak_field() * (-2.0 * LN_2 * x * x).exp()
    }

    pub fn t_center_au(&self) -> f64 {
        ps_to_au(self.t_center_ps)
    }

    pub fn fwhm_au(&self) -> f64 {
        ps_to_au(self.fwhm_ps)
    }

    pub fn detuning_au(&self) -> f64 {
        cm1_to_au(self.detuning_cm1)
    }

    /// Pulse support [t_c - 4 tau, t_c + 4 tau] in ps.
    pub fn support_ps(&self) -> (f64, f64) {
        (self.t_center_ps - 4.0 * self.fwhm_ps, self.t_center_ps + 4.0 * self.fwhm_ps)
    }

    pub fn bandwidth(&self) -> f64 {
        bandwidth(self.fwhm_ps)
    }

    /// mu * integral of E(t) dt.
    pub fn area(&self, mu: f64) -> f64 {
        mu * self.peak_field() * self.fwhm_au() * (PI / (2.0 * LN_2)).sqrt()
    }
}

/// Intensity-spectrum FWHM in cm^-1 for intensity FWHM `fwhm_ps`.
pub fn bandwidth(fwhm_ps: f64) -> f64 {
    if fwhm_ps.is_infinite() {
        return 0.0;
    }
    let hz = TIME_BANDWIDTH / (fwhm_ps * 1e-12);
    hz / (SPEED_OF_LIGHT * 100.0)
}

/// Peak field (a.u.) from pulse energy and a flat-top spot of diameter `spot_um`:
/// energy = (eps0 c / 2) E0^2 (pi d^2 / 4) integral g(t)^2 dt.
pub fn peak_field_from_energy(energy_nj: f64, spot_um: f64, fwhm_ps: f64) -> f64 {
    let tau = fwhm_ps * 1e-12;
    let g2 = tau * (PI / (4.0 * LN_2)).sqrt();
    let d = spot_um * 1e-6;
    let area = PI * d * d / 4.0;
    let e0 = (energy_nj * 1e-9 / (0.5 * EPSILON_0 * SPEED_OF_LIGHT * area * g2)).sqrt();
    e0 / AU_FIELD_V_PER_M
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_and_half_intensity() {
        let p = PulseSpec::with_field(50.0, 10.0, -4.0, 2e-6);
        assert_eq!(p.envelope(50.0).unwrap(), 2e-6);
        for t in [45.0, 55.0] {
            let i = p.envelope(t).unwrap().powi(2);
            assert!((i / 4e-12 - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn bandwidth_values() {
        assert!((bandwidth(10.0) - 1.47).abs() < 0.01 * 1.47);
        assert!((bandwidth(20.0) * 2.0 - bandwidth(10.0)).abs() < 1e-14);
        assert_eq!(bandwidth(f64::INFINITY), 0.0);
    }

    #[test]
    fn energy_scaling() {
        let a = peak_field_from_energy(1.5, 100.0, 10.0);
        assert!((peak_field_from_energy(3.0, 100.0, 10.0) / a - 2f64.sqrt()).abs() < 1e-12);
        assert!((peak_field_from_energy(1.5, 200.0, 10.0) * 2.0 / a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn default_spot_gives_pi_pulse() {
        let p = PulseSpec::with_energy(0.0, 10.0, -4.0, 1.5, DEFAULT_SPOT_UM);
        assert!((p.area(4.0) / PI - 1.0).abs() < 2e-3);
    }

    #[test]
    fn chirp_rejected() {
        let mut p = PulseSpec::with_field(0.0, 10.0, -4.0, 1e-6);
        p.chirp = 0.1;
        assert!(matches!(p.envelope(0.0), Err(Error::Unimplemented(_))));
        assert!(p.validate().is_err());
    }
}
