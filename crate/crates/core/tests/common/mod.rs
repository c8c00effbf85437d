//! Closed-form and independent reference solutions shared by the
//! integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use pairprobe::dynamics::{ChebyshevPropagator, ChebyshevWork, ManifoldHamiltonians, SplitOperator};
use pairprobe::grid::{norm_sqr, Grid, GridHamiltonian};
use pairprobe::states::{find_resonances_by, phase_shift_with, NumerovOptions, ResonanceSearch};
use pairprobe::units::{au_to_uk, uk_to_au, REDUCED_MASS_RB87};
use pairprobe::C64;

pub const M: f64 = REDUCED_MASS_RB87;

pub fn max_rel_err(a: &[C64], b: &[C64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

/// Free Gaussian of width `s0`, centre `x0`, momentum `k0` at time `t`.
pub fn free_gaussian(x: f64, t: f64, m: f64, s0: f64, x0: f64, k0: f64) -> C64 {
    let i = C64::new(0.0, 1.0);
    let a = C64::new(1.0, t / (2.0 * m * s0 * s0));
    let xc = x - x0 - k0 * t / m;
    let pre = (2.0 * PI * s0 * s0).powf(-0.25) / a.sqrt();
    pre * (-xc * xc / (4.0 * s0 * s0 * a) + i * k0 * (x - x0) - i * k0 * k0 * t / (2.0 * m)).exp()
}

/// Largest relative error of a Chebyshev-propagated free Gaussian over eight
/// steps, and the relative error of its final width.
pub fn free_gaussian_errors() -> (f64, f64) {
    let (m, s0, x0, k0) = (1.0, 4.0, 300.0, 0.6);
    let n = 4096;
    let grid = Grid::new(0.0, 1200.0, n).unwrap();
    let h = GridHamiltonian::new(grid.clone(), vec![0.0; n], m, 0).unwrap();
    let xs = grid.points();
    let mut psi: Vec<C64> = xs.iter().map(|&x| free_gaussian(x, 0.0, m, s0, x0, k0)).collect();
    let dt = 50.0;
    let prop = ChebyshevPropagator::new(ChebyshevPropagator::bounds_for(&h, 0.05), dt, 1e-15).unwrap();
    let mut work = ChebyshevWork::new();
    let mut worst: f64 = 0.0;
    for step in 1..=8 {
        prop.apply(&h, &mut psi, &mut work).unwrap();
        let t = step as f64 * dt;
        let exact: Vec<C64> = xs.iter().map(|&x| free_gaussian(x, t, m, s0, x0, k0)).collect();
        worst = worst.max(max_rel_err(&psi, &exact));
    }
    let dr = grid.dr;
    let mean: f64 = xs.iter().zip(&psi).map(|(x, z)| x * z.norm_sqr()).sum::<f64>() * dr;
    let var: f64 = xs.iter().zip(&psi).map(|(x, z)| (x - mean).powi(2) * z.norm_sqr()).sum::<f64>() * dr;
    let t = 8.0 * dt;
    let expect = s0 * (1.0 + (t / (2.0 * m * s0 * s0)).powi(2)).sqrt();
    (worst, (var.sqrt() - expect).abs() / expect)
}

/// Relative errors of a displaced ground state in a harmonic well after half
/// a period (mirrored, phase -i) and a full period (phase -1).
pub fn harmonic_revival_errors() -> (f64, f64) {
    let (m, w, centre, shift) = (1.0, 0.05, 100.0, 10.0);
    let n = 512;
    let grid = Grid::new(0.0, 200.0, n).unwrap();
    let xs = grid.points();
    let v: Vec<f64> = xs.iter().map(|x| 0.5 * m * w * w * (x - centre).powi(2)).collect();
    let h = GridHamiltonian::new(grid, v, m, 0).unwrap();
    let s = (1.0 / (2.0 * m * w)).sqrt();
    let ground = |x: f64| C64::new((2.0 * PI * s * s).powf(-0.25) * (-(x / (2.0 * s)).powi(2)).exp(), 0.0);
    let psi0: Vec<C64> = xs.iter().map(|&x| ground(x - centre - shift)).collect();
    let half = ChebyshevPropagator::new(ChebyshevPropagator::bounds_for(&h, 0.05), PI / w, 1e-15).unwrap();
    let mut work = ChebyshevWork::new();

    let mut psi = psi0.clone();
    half.apply(&h, &mut psi, &mut work).unwrap();
    let mirrored: Vec<C64> = xs.iter().map(|&x| ground(x - centre + shift) * C64::new(0.0, -1.0)).collect();
    let e_half = max_rel_err(&psi, &mirrored);

    half.apply(&h, &mut psi, &mut work).unwrap();
    let back: Vec<C64> = psi0.iter().map(|z| -z).collect();
    (e_half, max_rel_err(&psi, &back))
}

/// Largest deviation of split-operator excited populations on flat,
/// constantly coupled channels from (W/W')^2 sin^2(W' t / 2), and the largest
/// norm defect.
pub fn rabi_errors() -> (f64, f64) {
    let n = 64;
    let mu = 2.0;
    let g = Grid::new(0.0, 100.0, n).unwrap();
    let h = GridHamiltonian::new(g, vec![0.0; n], 1000.0, 0).unwrap();
    let ham = ManifoldHamiltonians { ground: h.clone(), excited: h, dipole: vec![mu; n] };
    let dr = ham.ground.grid.dr;
    let field = 4e-4;
    let omega = mu * field;
    let (mut worst, mut norm_defect): (f64, f64) = (0.0, 0.0);
    for detuning in [0.0, 3e-4, -5e-4] {
        let dt = 10.0;
        let mut sp = SplitOperator::new(&ham, detuning, dt).unwrap();
        let amp = 1.0 / (n as f64 * dr).sqrt();
        let mut g = vec![C64::new(amp, 0.0); n];
        let mut e = vec![C64::new(0.0, 0.0); n];
        let gen = (omega * omega + detuning * detuning).sqrt();
        for k in 1..=500 {
            sp.step(&mut g, &mut e, field);
            let t = k as f64 * dt;
            let pe = norm_sqr(&e, dr);
            let exact = (omega / gen).powi(2) * (0.5 * gen * t).sin().powi(2);
            worst = worst.max((pe - exact).abs());
            norm_defect = norm_defect.max((pe + norm_sqr(&g, dr) - 1.0).abs());
        }
    }
    (worst, norm_defect)
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix
/// (diag, off) by Sturm sequence.
pub fn sturm_count(diag: &[f64], off: f64, x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for (i, &a) in diag.iter().enumerate() {
        d = a - x - if i == 0 { 0.0 } else { off * off / d };
        if d == 0.0 {
            d = 1e-300;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues (uK) in [lo, hi] of -u''/2M + V u on (r0, r_box) with hard walls.
pub fn box_levels(v_uk: &dyn Fn(f64) -> f64, r0: f64, r_box: f64, h: f64, lo: f64, hi: f64) -> Vec<f64> {
    let n = ((r_box - r0) / h).round() as usize - 1;
    let t = au_to_uk(1.0 / (2.0 * M * h * h));
    let diag: Vec<f64> = (1..=n).map(|i| 2.0 * t + v_uk(r0 + i as f64 * h)).collect();
    let off = -t;
    let (c_lo, c_hi) = (sturm_count(&diag, off, lo), sturm_count(&diag, off, hi));
    (c_lo..c_hi)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if sturm_count(&diag, off, m) > k {
                    b = m;
                } else {
                    a = m;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Stabilization estimate: levels of many box sizes pile up at a
/// resonance; returns the centre of the most populated energy bin.
pub fn stabilization(v_uk: &dyn Fn(f64) -> f64, r0: f64, boxes: &[f64], h: f64, lo: f64, hi: f64, bins: usize) -> f64 {
    let mut all = Vec::new();
    for &r in boxes {
        all.extend(box_levels(v_uk, r0, r, h, lo, hi));
    }
    let width = (hi - lo) / bins as f64;
    let mut hist = vec![Vec::new(); bins];
    for e in all {
        let b = (((e - lo) / width) as usize).min(bins - 1);
        hist[b].push(e);
    }
    let best = hist.iter().max_by_key(|b| b.len()).unwrap();
    best.iter().sum::<f64>() / best.len() as f64
}

pub fn barrier(r: f64) -> f64 {
    5000.0 * (-((r - 200.0) / 15.0).powi(2)).exp()
}

/// Resonances found by the phase-shift scan on the synthetic barrier, and
/// the stabilization estimate.
pub fn synthetic_barrier() -> (Vec<f64>, f64) {
    let opts = NumerovOptions { step: 0.05, ..Default::default() };
    let v = |r: f64| uk_to_au(barrier(r));
    let phase = |j: u32, e_uk: f64| phase_shift_with(&v, M, j, uk_to_au(e_uk), 0.5, 300.0, &opts);
    let search = ResonanceSearch { e_min_uk: 50.0, e_max_uk: 1000.0, samples: 200, ..Default::default() };
    let table = find_resonances_by(&phase, &[0], &search).unwrap();
    let boxes: Vec<f64> = (0..21).map(|i| 400.0 + 10.0 * i as f64).collect();
    let stab = stabilization(&barrier, 0.5, &boxes, 0.25, 50.0, 1000.0, 200);
    (table.rows.iter().map(|r| r.energy_uk).collect(), stab)
}

/// Worst |delta_0 + k a| of a hard sphere of radius `a` over a few k.
pub fn hard_sphere_error() -> f64 {
    let a = 1.0;
    let v = |_r: f64| 0.0;
    let opts = NumerovOptions { step: 1e-3, ..Default::default() };
    [0.1f64, 0.3, 0.7, 1.2]
        .iter()
        .map(|&k| {
            let d = phase_shift_with(&v, 1.0, 0, k * k / 2.0, a, 40.0, &opts).unwrap();
            (d + k * a).abs()
        })
        .fold(0.0, f64::max)
}
