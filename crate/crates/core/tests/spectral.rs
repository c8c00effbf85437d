//! Harmonic inversion against synthetic signals with known content.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use pairprobe::spectral::{
    harmonic_inversion, periodogram, periodogram_peaks, InversionOptions, SpectralLine, CM1_PER_PS,
};

fn tones(t: &[f64], parts: &[(f64, f64, f64)]) -> Vec<f64> {
    t.iter()
        .map(|&t| parts.iter().map(|&(f, a, p)| a * (2.0 * PI * CM1_PER_PS * f * t + p).cos()).sum())
        .collect()
}

fn record(n: usize, dt: f64) -> (Vec<f64>, f64) {
    let t: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
    let rayleigh = 1.0 / (CM1_PER_PS * n as f64 * dt);
    (t, rayleigh)
}

#[test]
fn resolves_one_percent_separation() {
    let (t, _) = record(500, 2.0);
    let (f1, f2) = (1.0, 1.01);
    let c = tones(&t, &[(f1, 1.0, 0.0), (f2, 0.8, 1.0)]);
    let inv = harmonic_inversion(&t, &c, &InversionOptions::default()).unwrap();
    let mut f: Vec<f64> = inv.lines.iter().map(|l| l.frequency_cm1).collect();
    f.sort_by(f64::total_cmp);
    assert_eq!(f.len(), 2, "{f:?}");
    assert!((f[0] - f1).abs() < 1e-4 && (f[1] - f2).abs() < 1e-4, "{f:?}");
}

#[test]
fn two_tones_five_times_below_rayleigh_at_60_db() {
    let (t, rayleigh) = record(500, 2.0);
    let (f1, f2) = (0.9, 0.9 + 0.2 * rayleigh);
    let clean = tones(&t, &[(f1, 1.0, 0.3), (f2, 1.0, 2.0)]);
    let power = clean.iter().map(|x| x * x).sum::<f64>() / clean.len() as f64;
    let noise = Normal::new(0.0, (power * 1e-6).sqrt()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c: Vec<f64> = clean.iter().map(|x| x + noise.sample(&mut rng)).collect();

    // The periodogram sees a single peak.
    let spec = periodogram(&t, &c).unwrap();
    let near: Vec<f64> =
        periodogram_peaks(&spec, 0.1).into_iter().filter(|f| (f - f1).abs() < 2.0 * rayleigh).collect();
    assert_eq!(near.len(), 1, "{near:?}");

    let opts = InversionOptions { model_order: Some(8), ..Default::default() };
    let inv = harmonic_inversion(&t, &c, &opts).unwrap();
    let mut f: Vec<f64> =
        inv.lines.iter().filter(|l| l.amplitude > 0.5).map(|l| l.frequency_cm1).collect();
    f.sort_by(f64::total_cmp);
    assert_eq!(f.len(), 2, "{:?}", inv.lines);
    let sep = f2 - f1;
    assert!((f[0] - f1).abs() < 0.1 * sep && (f[1] - f2).abs() < 0.1 * sep, "{f:?} vs {f1} {f2}");
}

#[test]
fn lines_outside_band_are_dropped() {
    let (t, _) = record(400, 2.0);
    let c = tones(&t, &[(0.4, 1.0, 0.0), (3.0, 1.0, 0.0)]);
    let opts = InversionOptions { band_cm1: (0.0, 1.0), ..Default::default() };
    let inv = harmonic_inversion(&t, &c, &opts).unwrap();
    assert_eq!(inv.lines.len(), 1);
    assert!((inv.lines[0].frequency_cm1 - 0.4).abs() < 1e-8);
}

#[test]
fn baseline_and_decay_are_not_lines() {
    let (t, _) = record(400, 2.0);
    let c: Vec<f64> = tones(&t, &[(0.7, 0.3, 0.5)])
        .iter()
        .zip(&t)
        .map(|(x, &t)| x + 2.0 - 0.5 * (-t / 150.0).exp())
        .collect();
    let inv = harmonic_inversion(&t, &c, &InversionOptions::default()).unwrap();
    assert_eq!(inv.lines.len(), 1, "{:?}", inv.lines);
    assert!((inv.lines[0].frequency_cm1 - 0.7).abs() < 1e-6);
    assert!((inv.lines[0].amplitude - 0.3).abs() < 1e-6);
}

#[test]
fn noisy_lines_lose_confidence() {
    let (t, _) = record(400, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 0.3).unwrap();
    let c: Vec<f64> = tones(&t, &[(0.6, 1.0, 0.0)]).iter().map(|x| x + noise.sample(&mut rng)).collect();
    let inv = harmonic_inversion(&t, &c, &InversionOptions { model_order: Some(20), ..Default::default() }).unwrap();
    let (tone, rest): (Vec<&SpectralLine>, Vec<_>) = inv.lines.iter().partition(|l| (l.frequency_cm1 - 0.6).abs() < 0.01);
    assert_eq!(tone.len(), 1, "{:?}", inv.lines);
    assert!(tone[0].confidence > 0.9, "{:?}", tone[0]);
    assert!(rest.iter().all(|l| l.confidence < tone[0].confidence), "{:?}", inv.lines);
}
