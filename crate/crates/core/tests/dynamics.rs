//! Propagators against closed-form wavepacket and two-level solutions.

mod common;

use pairprobe::dynamics::{pump_manifold, Manifold, ManifoldState, PropagatorConfig};
use pairprobe::grid::{norm_sqr, Grid};
use pairprobe::probe::ManifoldSetup;
use pairprobe::pulses::PulseSpec;
use pairprobe::states::scattering_state;
use pairprobe::units::REDUCED_MASS_RB87;
use pairprobe::C64;

#[test]
fn free_gaussian_spreading() {
    let (err, width) = common::free_gaussian_errors();
    assert!(err < 1e-6, "{err:.3e}");
    assert!(width < 1e-6, "width {width:.3e}");
}

#[test]
fn harmonic_well_revival() {
    let (half, full) = common::harmonic_revival_errors();
    assert!(half < 1e-6, "half period: {half:.3e}");
    assert!(full < 1e-6, "full period: {full:.3e}");
}

#[test]
fn constant_coupling_rabi_populations() {
    let (err, norm) = common::rabi_errors();
    assert!(err < 1e-6, "{err:.3e}");
    assert!(norm < 1e-12, "{norm:.3e}");
}

fn pumped_population(dt_ps: f64) -> (f64, f64) {
    let grid = Grid::new(3.0, 400.0, 1024).unwrap();
    let ms = ManifoldSetup::triplet();
    let hams = ms.hamiltonians(&grid, 0, REDUCED_MASS_RB87);
    let psi = scattering_state(&hams.ground, 20.0).unwrap().psi;
    let mut state = ManifoldState {
        manifold: Manifold::Triplet,
        weight: 1.0,
        ground: psi.iter().map(|&x| C64::new(x, 0.0)).collect(),
        excited: None,
    };
    let pulse = PulseSpec::with_energy(0.0, 10.0, -4.0, 1.5, pairprobe::pulses::DEFAULT_SPOT_UM);
    let cfg = PropagatorConfig { dt_pulse_ps: dt_ps, ..Default::default() };
    let r = pump_manifold(&mut state, &hams, &pulse, &cfg, &mut |_, _, _| {}).unwrap();
    let total = norm_sqr(&state.ground, grid.dr) + r.excited_population;
    (r.excited_population, total)
}

#[test]
fn pump_step_is_second_order_and_unitary() {
    let (p1, n1) = pumped_population(0.01);
    let (p2, _) = pumped_population(0.005);
    let (p3, n3) = pumped_population(0.0025);
    assert!((n1 - 1.0).abs() < 1e-10 && (n3 - 1.0).abs() < 1e-10);
    let ratio = (p1 - p2) / (p2 - p3);
    assert!(ratio > 3.5 && ratio < 4.5, "Richardson ratio {ratio}");
    // Extrapolated error of the default step.
    let err = (p2 - p3).abs() / 3.0;
    assert!(err < 1e-3 * p3, "{err:.3e} vs {p3:.3e}");
}
