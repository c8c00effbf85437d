//! Pump-probe simulation of two-body pair correlations in an ultracold gas.
//!
//! A colliding atom pair is represented on a radial grid. A Gaussian pump
//! pulse carves a hole into the ground-state pair wavefunction, the hole
//! evolves freely, and a probe pulse of the same shape measures the pair
//! density inside its resonance window as a function of delay. The resulting
//! transient signal can be inverted into beat frequencies that coincide with
//! the bound-level energies of the interaction potential.
//!
//! Everything is in atomic units internally; see [`units`] for conversions.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod potentials;
pub mod probe;
pub mod pulses;
pub mod spectral;
pub mod states;
pub mod units;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;
