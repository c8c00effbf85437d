//! Physical constants (CODATA 2018) and conversions between atomic units and
//! the spectroscopic units used for input and output.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HARTREE_CM1: f64 = 219_474.631_363_2;
pub const HARTREE_GHZ: f64 = 6.579_683_920_502e6;
pub const HARTREE_K: f64 = 3.157_750_248_040_7e5;
pub const HARTREE_J: f64 = 4.359_744_722_207_1e-18;
pub const AU_TIME_S: f64 = 2.418_884_326_585_7e-17;
pub const AU_FIELD_V_PER_M: f64 = 5.142_206_747_63e11;
pub const BOHR_M: f64 = 5.291_772_109_03e-11;
pub const AMU_ME: f64 = 1_822.888_486_209;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

pub const RB87_MASS_U: f64 = 86.909_180_527;

/// Reduced mass of an 87Rb pair in electron masses.
pub const REDUCED_MASS_RB87: f64 = RB87_MASS_U / 2.0 * AMU_ME;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Energy,
    Time,
    Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    Bohr,
    Hartree,
    InverseCm,
    GHz,
    Kelvin,
    MicroKelvin,
    NanoJoule,
    Picosecond,
    AuTime,
    AuField,
}

impl Unit {
    pub const ALL: [Unit; 10] = [
        Unit::Bohr,
        Unit::Hartree,
        Unit::InverseCm,
        Unit::GHz,
        Unit::Kelvin,
        Unit::MicroKelvin,
        Unit::NanoJoule,
        Unit::Picosecond,
        Unit::AuTime,
        Unit::AuField,
    ];

    pub fn dimension(self) -> Dimension {
        match self {
            Unit::Bohr => Dimension::Length,
            Unit::Hartree
            | Unit::InverseCm
            | Unit::GHz
            | Unit::Kelvin
            | Unit::MicroKelvin
            | Unit::NanoJoule => Dimension::Energy,
            Unit::Picosecond | Unit::AuTime => Dimension::Time,
            Unit::AuField => Dimension::Field,
        }
    }

    /// Size of one of this unit in atomic units.
    pub fn in_atomic_units(self) -> f64 {
        match self {
            Unit::Bohr | Unit::Hartree | Unit::AuTime | Unit::AuField => 1.0,
            Unit::InverseCm => 1.0 / HARTREE_CM1,
            Unit::GHz => 1.0 / HARTREE_GHZ,
            Unit::Kelvin => 1.0 / HARTREE_K,
            Unit::MicroKelvin => 1e-6 / HARTREE_K,
            Unit::NanoJoule => 1e-9 / HARTREE_J,
            Unit::Picosecond => 1e-12 / AU_TIME_S,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::Bohr => "bohr",
            Unit::Hartree => "hartree",
            Unit::InverseCm => "cm-1",
            Unit::GHz => "GHz",
            Unit::Kelvin => "K",
            Unit::MicroKelvin => "uK",
            Unit::NanoJoule => "nJ",
            Unit::Picosecond => "ps",
            Unit::AuTime => "au_time",
            Unit::AuField => "au_field",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let u = match s.trim() {
            "bohr" | "a0" => Unit::Bohr,
            "hartree" | "Eh" | "au_energy" => Unit::Hartree,
            "cm-1" | "cm^-1" | "cm⁻¹" | "1/cm" => Unit::InverseCm,
            "GHz" | "ghz" => Unit::GHz,
            "K" => Unit::Kelvin,
            "uK" | "µK" | "microK" => Unit::MicroKelvin,
            "nJ" | "nj" => Unit::NanoJoule,
            "ps" => Unit::Picosecond,
            "au_time" | "a.u.-time" => Unit::AuTime,
            "au_field" | "a.u.-field" => Unit::AuField,
            other => return Err(Error::UnknownUnit(other.to_string())),
        };
        Ok(u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Self {
        Quantity { value, unit }
    }

    pub fn to(self, target: Unit) -> Result<Quantity> {
        convert(self, target)
    }

    pub fn atomic(self) -> f64 {
        self.value * self.unit.in_atomic_units()
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

pub fn convert(q: Quantity, target: Unit) -> Result<Quantity> {
    if q.unit.dimension() != target.dimension() {
        return Err(Error::UnitMismatch { from: q.unit, to: target });
    }
    if q.unit == target {
        return Ok(q);
    }
    let value = q.value * (q.unit.in_atomic_units() / target.in_atomic_units());
    Ok(Quantity::new(value, target))
}

#[inline]
pub fn cm1_to_au(x: f64) -> f64 {
    x / HARTREE_CM1
}

#[inline]
pub fn au_to_cm1(x: f64) -> f64 {
    x * HARTREE_CM1
}

#[inline]
pub fn uk_to_au(x: f64) -> f64 {
    x * 1e-6 / HARTREE_K
}

#[inline]
pub fn au_to_uk(x: f64) -> f64 {
    x * HARTREE_K * 1e6
}

#[inline]
pub fn ps_to_au(x: f64) -> f64 {
    x * 1e-12 / AU_TIME_S
}

#[inline]
pub fn au_to_ps(x: f64) -> f64 {
    x * AU_TIME_S * 1e12
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kelvin_to_wavenumber() {
        let q = convert(Quantity::new(1.0, Unit::Kelvin), Unit::InverseCm).unwrap();
        assert!((q.value - 0.695_034_8).abs() < 5e-8);
    }

    #[test]
    fn picoseconds_to_atomic_time() {
        let q = convert(Quantity::new(10.0, Unit::Picosecond), Unit::AuTime).unwrap();
        assert!((q.value / 4.134_137e5 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_stays_zero() {
        let q = convert(Quantity::new(0.0, Unit::InverseCm), Unit::GHz).unwrap();
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn mismatch_names_both_units() {
        let err = convert(Quantity::new(1.0, Unit::Bohr), Unit::Picosecond).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bohr") && msg.contains("ps"), "{msg}");
    }

    #[test]
    fn reduced_mass() {
        assert!((REDUCED_MASS_RB87 - 79_212.8).abs() < 0.1);
    }

    #[test]
    fn parse_symbols() {
        for u in Unit::ALL {
            assert_eq!(u.symbol().parse::<Unit>().unwrap(), u);
        }
        assert!("furlong".parse::<Unit>().is_err());
    }
}
