//! Model interaction potentials for the ground and excited channels.
//!
//! Each channel is V(r) = A exp(-beta r) - D s(C_n / (D r^n)) + asymptote with
//! s(x) = x / (1 + x^8)^(1/8). The saturation leaves the -C_n/r^n tail intact
//! at long range and bounds the well depth by D; the wall position r_w sets
//! A = D exp(beta r_w) and is the tuning knob for near-threshold levels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::units::cm1_to_au;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    #[serde(rename = "X-singlet")]
    XSinglet,
    #[serde(rename = "a-triplet")]
    ATriplet,
    #[serde(rename = "0u+")]
    ZeroUPlus,
    #[serde(rename = "0g-")]
    ZeroGMinus,
}

impl Channel {
    pub fn is_excited(self) -> bool {
        matches!(self, Channel::ZeroUPlus | Channel::ZeroGMinus)
    }

    pub fn dispersion_power(self) -> i32 {
        if self.is_excited() {
            3
        } else {
            6
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Channel::XSinglet => "X-singlet",
            Channel::ATriplet => "a-triplet",
            Channel::ZeroUPlus => "0u+",
            Channel::ZeroGMinus => "0g-",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelPotential {
    pub channel: Channel,
    /// Well-depth scale D (hartree).
    pub depth: f64,
    /// C6 for ground channels, C3 for excited ones (atomic units).
    pub c_n: f64,
    /// Exponential range (1/bohr).
    pub beta: f64,
    /// Inner-wall position (bohr).
    pub r_wall: f64,
    /// Dissociation limit (hartree).
    #[serde(default)]
    pub asymptote: f64,
}

impl ChannelPotential {
    pub fn triplet() -> Self {
        ChannelPotential {
            channel: Channel::ATriplet,
            depth: cm1_to_au(30.0),
            c_n: 4707.0,
            beta: 1.0,
            r_wall: 10.82,
            asymptote: 0.0,
        }
    }

    pub fn singlet() -> Self {
        ChannelPotential {
            channel: Channel::XSinglet,
            depth: cm1_to_au(45.0),
            c_n: 4707.0,
            beta: 1.0,
            r_wall: 10.5,
            asymptote: 0.0,
        }
    }

    pub fn zero_u_plus() -> Self {
        ChannelPotential {
            channel: Channel::ZeroUPlus,
            depth: cm1_to_au(64.0),
            c_n: 8.0,
            beta: 1.0,
            r_wall: 8.0,
            asymptote: 0.0,
        }
    }

    pub fn zero_g_minus() -> Self {
        ChannelPotential { channel: Channel::ZeroGMinus, c_n: 12.0, ..Self::zero_u_plus() }
    }

    pub fn default_for(channel: Channel) -> Self {
        match channel {
            Channel::ATriplet => Self::triplet(),
            Channel::XSinglet => Self::singlet(),
            Channel::ZeroUPlus => Self::zero_u_plus(),
            Channel::ZeroGMinus => Self::zero_g_minus(),
        }
    }

    /// Short-range amplitude A (hartree).
    pub fn amplitude(&self) -> f64 {
        self.depth * (self.beta * self.r_wall).exp()
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.depth > 0.0 && self.c_n > 0.0 && self.beta > 0.0 && self.r_wall > 0.0;
        if !ok || !self.asymptote.is_finite() {
            return Err(Error::Precondition(format!(
                "{}: depth, c_n, beta and r_wall must be positive",
                self.channel.label()
            )));
        }
        Ok(())
    }

    pub fn value(&self, r: f64) -> f64 {
        let n = self.channel.dispersion_power();
        let x = self.c_n / (self.depth * r.powi(n));
        let sat = x / (1.0 + x.powi(8)).powf(0.125);
        self.depth * (self.beta * (self.r_wall - r)).exp() - self.depth * sat + self.asymptote
    }

    /// V(r) + J(J+1)/(2 mass r^2) on every grid point.
    pub fn evaluate(&self, grid: &Grid, j: u32, mass: f64) -> Vec<f64> {
        let l = (j * (j + 1)) as f64;
        grid.points().iter().map(|&r| self.value(r) + l / (2.0 * mass * r * r)).collect()
    }

    pub fn value_j(&self, r: f64, j: u32, mass: f64) -> f64 {
        self.value(r) + (j * (j + 1)) as f64 / (2.0 * mass * r * r)
    }
}

/// Delta(r) = V_e - V_g - omega_p on the grid; omega_p is measured from the
/// atomic line, so Delta(infinity) = -omega_p.
pub fn difference_potential(
    e: &ChannelPotential,
    g: &ChannelPotential,
    grid: &Grid,
    omega_p: f64,
) -> Vec<f64> {
    grid.points().iter().map(|&r| e.value(r) - g.value(r) - omega_p).collect()
}

/// All roots of Delta(r) = 0 in [r_lo, r_hi], ascending.
pub fn condon_roots(
    e: &ChannelPotential,
    g: &ChannelPotential,
    omega_p: f64,
    r_lo: f64,
    r_hi: f64,
) -> Vec<f64> {
    let f = |r: f64| e.value(r) - g.value(r) - omega_p;
    let steps = (((r_hi - r_lo) / 0.05).ceil() as usize).max(1);
    let h = (r_hi - r_lo) / steps as f64;
    let mut roots = Vec::new();
    let mut a = r_lo;
    let mut fa = f(a);
    for i in 1..=steps {
        let b = r_lo + i as f64 * h;
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            roots.push(bisect(&f, a, b, fa));
        }
        a = b;
        fa = fb;
    }
    roots
}

/// Outermost Condon root, if any.
pub fn condon_radius(e: &ChannelPotential, g: &ChannelPotential, omega_p: f64, grid: &Grid) -> Option<f64> {
    condon_roots(e, g, omega_p, grid.r_min, grid.r_max).last().copied()
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a) < 1e-13 * m.abs().max(1.0) {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum DipoleFunction {
    Constant { value: f64 },
    /// Piecewise-linear in r, held constant beyond the table ends.
    Tabulated { r: Vec<f64>, mu: Vec<f64> },
}

impl Default for DipoleFunction {
    fn default() -> Self {
        DipoleFunction::Constant { value: 4.0 }
    }
}

impl DipoleFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            DipoleFunction::Constant { value } if *value > 0.0 => Ok(()),
            DipoleFunction::Constant { .. } => Err(Error::Precondition("dipole must be positive".into())),
            DipoleFunction::Tabulated { r, mu } => {
                if r.len() != mu.len() || r.is_empty() {
                    return Err(Error::Precondition("dipole table columns differ in length".into()));
                }
                if r.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Precondition("dipole table r must increase".into()));
                }
                if mu.iter().any(|&m| m <= 0.0) {
                    return Err(Error::Precondition("dipole must be positive".into()));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            DipoleFunction::Constant { value } => *value,
            DipoleFunction::Tabulated { r, mu } => {
                if x <= r[0] {
                    return mu[0];
                }
                if x >= r[r.len() - 1] {
                    return mu[mu.len() - 1];
                }
                let k = r.partition_point(|&ri| ri <= x) - 1;
                let t = (x - r[k]) / (r[k + 1] - r[k]);
                mu[k] + t * (mu[k + 1] - mu[k])
            }
        }
    }

    pub fn samples(&self, grid: &Grid) -> Vec<f64> {
        grid.points().iter().map(|&r| self.value(r)).collect()
    }
}
