//! Resonance positions from phase-shift scans checked against an
//! independent stabilization calculation.

mod common;

use std::f64::consts::PI;

use common::{box_levels, stabilization, synthetic_barrier, M};
use pairprobe::potentials::ChannelPotential;
use pairprobe::states::{find_resonances, phase_shift, phase_shift_with, NumerovOptions, ResonanceSearch};
use pairprobe::units::{au_to_uk, uk_to_au};

#[test]
fn synthetic_barrier_peak_matches_stabilization() {
    let (peaks, stab) = synthetic_barrier();
    assert_eq!(peaks.len(), 1, "{peaks:?}");
    assert!((peaks[0] - stab).abs() < 0.1 * stab, "peak {} vs stabilization {stab}", peaks[0]);
}

#[test]
fn hard_sphere_s_wave() {
    let err = common::hard_sphere_error();
    assert!(err < 1e-6, "{err:.3e}");
}

#[test]
fn triplet_j2_shape_resonance() {
    let pot = ChannelPotential::triplet();
    let search = ResonanceSearch { e_min_uk: 50.0, e_max_uk: 600.0, samples: 60, ..Default::default() };
    let table = find_resonances(&pot, M, &[2], &search, &NumerovOptions::default()).unwrap();
    assert_eq!(table.rows.len(), 1, "{:?}", table.rows);
    let r = table.rows[0];
    assert!(r.energy_uk > 100.0 && r.energy_uk < 500.0, "{r:?}");
    assert!(r.width_uk > 0.0 && r.width_uk < r.energy_uk);

    let v = |r: f64| au_to_uk(pot.value_j(r, 2, M) - pot.asymptote);
    let boxes: Vec<f64> = (0..21).map(|i| 300.0 + 10.0 * i as f64).collect();
    let stab = stabilization(&v, 4.0, &boxes, 0.01, 50.0, 600.0, 110);
    assert!((r.energy_uk - stab).abs() < 0.2 * stab, "peak {} vs stabilization {stab}", r.energy_uk);
}

#[test]
fn no_s_or_g_wave_resonance_at_low_energy() {
    let pot = ChannelPotential::triplet();
    let search = ResonanceSearch { e_min_uk: 1.0, e_max_uk: 600.0, samples: 60, ..Default::default() };
    let table = find_resonances(&pot, M, &[0, 4], &search, &NumerovOptions::default()).unwrap();
    assert!(table.rows.is_empty(), "{:?}", table.rows);
}

#[test]
fn levinson_count_on_synthetic_well() {
    // Smooth well of 2 cm-1 depth and ~30 bohr radius.
    let depth_uk = 2.0 * 1.438_776_877e6;
    let well = |r: f64| -depth_uk / (1.0 + ((r - 30.0) / 1.5).exp());
    let bound = box_levels(&well, 0.5, 400.0, 0.02, -depth_uk, 0.0).len();
    assert!(bound >= 3, "{bound}");
    let v = |r: f64| uk_to_au(well(r));
    let opts = NumerovOptions { step: 0.01, ..Default::default() };
    let d = phase_shift_with(&v, M, 0, uk_to_au(0.01), 0.5, 120.0, &opts).unwrap();
    assert_eq!((d / PI).round() as usize, bound, "delta/pi = {}", d / PI);
}

#[test]
fn triplet_levinson_count() {
    let pot = ChannelPotential::triplet();
    let d = phase_shift(&pot, M, 0, uk_to_au(0.01), &NumerovOptions::default()).unwrap();
    let v = |r: f64| au_to_uk(pot.value(r) - pot.asymptote);
    // The last level is bound by ~1 uK and extends past 1000 bohr.
    let bound = box_levels(&v, 4.0, 3000.0, 0.005, -au_to_uk(1.2 * pot.depth), 0.0).len();
    assert_eq!((d / PI).round() as usize, bound, "delta/pi = {}", d / PI);
}
