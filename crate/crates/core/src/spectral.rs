//! Harmonic inversion of transient signals and a periodogram cross-check.
//!
//! The line model is c(t) = sum_k d_k exp((-gamma_k - i omega_k) t), fitted by
//! the matrix-pencil method on a real Hankel matrix so that the poles of a
//! real signal come in exact conjugate pairs. Real poles carry the
//! non-oscillatory background and are not reported as lines.

use std::f64::consts::PI;
use std::io::Write;

use ndarray::{s, Array1, Array2};
use ndarray_linalg::{Eig, LeastSquaresSvd, SVD};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::C64;

/// Cycles per ps of one cm^-1.
pub const CM1_PER_PS: f64 = 0.029_979_245_8;

pub const MIN_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub frequency_cm1: f64,
    /// 2 |d|, the peak-to-zero height of the real cosine.
    pub amplitude: f64,
    /// Growth is reported as zero decay.
    pub decay_cm1: f64,
    pub confidence: f64,
    pub(crate) pole: C64,
    pub(crate) coeff: C64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionOptions {
    /// Lines outside [lo, hi] cm^-1 are dropped.
    pub band_cm1: (f64, f64),
    pub max_lines: usize,
    /// Pencil model order; `None` starts at min(40, numerical rank) and
    /// lowers it until the pole basis is well conditioned.
    pub model_order: Option<usize>,
    /// Samples before this delay are ignored.
    pub t_start_ps: f64,
    /// Relative amplitude floor.
    pub amplitude_floor: f64,
    /// Whether to score lines by refitting perturbed records.
    pub confidence: bool,
}

impl Default for InversionOptions {
    fn default() -> Self {
        InversionOptions {
            band_cm1: (0.0, f64::INFINITY),
            max_lines: 20,
            model_order: None,
            t_start_ps: 0.0,
            amplitude_floor: 1e-3,
            confidence: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    pub lines: Vec<SpectralLine>,
    /// RMS misfit of the full pole model over RMS signal.
    pub residual: f64,
    /// Ratio of extreme singular values of the retained pencil subspace.
    pub condition: f64,
    pub model_order: usize,
}

struct Pencil {
    poles: Vec<C64>,
    coeffs: Vec<C64>,
    condition: f64,
}

const DEFAULT_ORDER: usize = 40;
const RANK_TOL: f64 = 1e-10;
const MAX_CONDITION: f64 = 1e13;

fn pencil(c: &[f64], order: Option<usize>, l: usize) -> Result<Pencil> {
    let n = c.len();
    let rows = n - l;
    let mut y = Array2::<f64>::zeros((rows, l + 1));
    for i in 0..rows {
        for j in 0..=l {
            y[[i, j]] = c[i + j];
        }
    }
    let (_, sv, vt) = y.svd(false, true)?;
    let vt = vt.expect("requested right singular vectors");
    if sv[0] == 0.0 {
        return Ok(Pencil { poles: Vec::new(), coeffs: Vec::new(), condition: 1.0 });
    }
    let rank = sv.iter().filter(|&&x| x > RANK_TOL * sv[0]).count();
    match order {
        Some(m) => {
            let m = m.min(l).min(rows);
            let cond = sv[0] / sv[m - 1];
            if !(cond < MAX_CONDITION) {
                return Err(Error::IllConditioned {
                    condition: cond,
                    advice: format!(
                        "model order {m} exceeds the signal's numerical rank {rank}; use a longer signal or fewer lines"
                    ),
                });
            }
            fit_order(c, &vt, &sv, m)
        }
        None => {
            // Step the order down until the pole basis is well conditioned.
            let mut m = DEFAULT_ORDER.min(rank).min(l);
            loop {
                match fit_order(c, &vt, &sv, m) {
                    Err(Error::IllConditioned { .. }) if m > 2 => m -= 2,
                    other => return other,
                }
            }
        }
    }
}

fn fit_order(c: &[f64], vt: &Array2<f64>, sv: &Array1<f64>, m: usize) -> Result<Pencil> {
    let n = c.len();
    let l = vt.ncols() - 1;
    let condition = sv[0] / sv[m - 1];
    let v = vt.slice(s![..m, ..]).t().to_owned();
    let v1 = v.slice(s![..l, ..]).to_owned();
    let v2 = v.slice(s![1.., ..]).to_owned();
    if m == 1 {
        // Single real pole: scalar least squares for pole and coefficient.
        let z = v1.column(0).dot(&v2.column(0)) / v1.column(0).dot(&v1.column(0));
        let (mut num, mut den, mut x) = (0.0, 0.0, 1.0);
        for &ci in c {
            num += ci * x;
            den += x * x;
            x *= z;
        }
        let poles = vec![C64::new(z, 0.0)];
        return Ok(Pencil { poles, coeffs: vec![C64::new(num / den, 0.0)], condition });
    }
    let a = v1.least_squares(&v2)?.solution;
    let (z, _) = a.eig()?;
    let poles: Vec<C64> = z.to_vec();

    let mut zm = Array2::<C64>::zeros((n, m));
    for (k, &p) in poles.iter().enumerate() {
        let mut x = C64::new(1.0, 0.0);
        for i in 0..n {
            zm[[i, k]] = x;
            x *= p;
        }
    }
    let rhs: Array1<C64> = c.iter().map(|&x| C64::new(x, 0.0)).collect();
    let (_, zs, _) = zm.svd(false, false)?;
    let zcond = zs[0] / zs[zs.len() - 1];
    if !(zcond < MAX_CONDITION) || !zcond.is_finite() {
        return Err(Error::IllConditioned {
            condition: zcond,
            advice: "nearly coincident poles; use a longer signal or fewer lines".into(),
        });
    }
    let d = zm.least_squares(&rhs)?.solution;
    Ok(Pencil { poles, coeffs: d.to_vec(), condition })
}

fn to_lines(p: &Pencil, dt: f64) -> Vec<SpectralLine> {
    p.poles
        .iter()
        .zip(&p.coeffs)
        .filter(|(z, _)| z.im < 0.0)
        .map(|(&z, &d)| {
            let omega = -z.arg() / dt;
            let gamma = -z.norm().ln() / dt;
            SpectralLine {
                frequency_cm1: omega / (2.0 * PI * CM1_PER_PS),
                amplitude: 2.0 * d.norm(),
                decay_cm1: (gamma / (2.0 * PI * CM1_PER_PS)).max(0.0),
                confidence: 0.0,
                pole: z,
                coeff: d,
            }
        })
        .collect()
}

fn uniform_step(t: &[f64]) -> Result<f64> {
    let dt = t[1] - t[0];
    if !(dt > 0.0) || t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return Err(Error::Precondition("harmonic inversion needs uniformly spaced delays".into()));
    }
    Ok(dt)
}

/// Fits the line model to `c(t)` sampled at uniform delays `t_ps`.
pub fn harmonic_inversion(t_ps: &[f64], c: &[f64], opts: &InversionOptions) -> Result<Inversion> {
    if t_ps.len() != c.len() {
        return Err(Error::LengthMismatch { expected: t_ps.len(), got: c.len() });
    }
    let start = t_ps.iter().position(|&t| t >= opts.t_start_ps - 1e-9).unwrap_or(t_ps.len());
    let (t, c) = (&t_ps[start..], &c[start..]);
    if t.len() < MIN_SAMPLES {
        return Err(Error::Precondition(format!(
            "harmonic inversion needs at least {MIN_SAMPLES} samples after {} ps, got {}",
            opts.t_start_ps,
            t.len()
        )));
    }
    let dt = uniform_step(t)?;
    let nyquist = 0.5 / (dt * CM1_PER_PS);
    if opts.band_cm1.0 < 0.0 || opts.band_cm1.0 >= opts.band_cm1.1 || opts.band_cm1.0 > nyquist {
        return Err(Error::Precondition(format!(
            "band [{}, {}] cm-1 is not inside [0, {nyquist:.4}] cm-1 (Nyquist)",
            opts.band_cm1.0, opts.band_cm1.1
        )));
    }
    let n = c.len();
    let base = pencil(c, opts.model_order, n / 3)?;
    let residual = model_residual(&base, c);
    let mut lines = to_lines(&base, dt);
    let top = lines.iter().fold(0.0f64, |a, l| a.max(l.amplitude));
    lines.retain(|l| {
        l.amplitude > opts.amplitude_floor * top
            && l.frequency_cm1 >= opts.band_cm1.0
            && l.frequency_cm1 <= opts.band_cm1.1
    });
    lines.sort_by(|a, b| b.amplitude.total_cmp(&a.amplitude));
    lines.truncate(opts.max_lines);
    if opts.confidence && !lines.is_empty() {
        let refits = [
            pencil(&c[..(0.8 * n as f64) as usize], opts.model_order, (0.8 * n as f64) as usize / 3),
            pencil(&c[..(0.9 * n as f64) as usize], opts.model_order, (0.9 * n as f64) as usize / 3),
            pencil(c, opts.model_order, n / 2),
        ];
        let common = (0.8 * n as f64) as usize;
        let refit_lines: Vec<Vec<SpectralLine>> =
            refits.iter().map(|r| r.as_ref().map(|p| to_lines(p, dt)).unwrap_or_default()).collect();
        for l in lines.iter_mut() {
            let mut log_sum = 0.0;
            for other in &refit_lines {
                let score = other
                    .iter()
                    .min_by(|a, b| {
                        (a.frequency_cm1 - l.frequency_cm1).abs().total_cmp(&(b.frequency_cm1 - l.frequency_cm1).abs())
                    })
                    .map_or(0.0, |m| component_agreement(l, m, common));
                log_sum += score.max(1e-300).ln();
            }
            l.confidence = (log_sum / refit_lines.len() as f64).exp();
            if l.confidence < 1e-100 {
                l.confidence = 0.0;
            }
        }
    }
    Ok(Inversion { lines, residual, condition: base.condition, model_order: base.poles.len() })
}

/// 1 - |c_a - c_b|^2 / |c_a|^2 for the real components of two lines over
/// the first `n` samples, clamped at zero.
fn component_agreement(a: &SpectralLine, b: &SpectralLine, n: usize) -> f64 {
    let (mut za, mut zb) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    let (mut diff, mut pow) = (0.0, 0.0);
    for _ in 0..n {
        let ca = 2.0 * (a.coeff * za).re;
        let cb = 2.0 * (b.coeff * zb).re;
        diff += (ca - cb).powi(2);
        pow += ca * ca;
        za *= a.pole;
        zb *= b.pole;
    }
    if pow == 0.0 {
        return 0.0;
    }
    (1.0 - diff / pow).max(0.0)
}

fn model_residual(p: &Pencil, c: &[f64]) -> f64 {
    let mut z: Vec<C64> = vec![C64::new(1.0, 0.0); p.poles.len()];
    let (mut err, mut pow) = (0.0, 0.0);
    for &x in c {
        let mut m = C64::new(0.0, 0.0);
        for k in 0..p.poles.len() {
            m += p.coeffs[k] * z[k];
            z[k] *= p.poles[k];
        }
        err += (m.re - x).powi(2);
        pow += x * x;
    }
    if pow == 0.0 {
        0.0
    } else {
        (err / pow).sqrt()
    }
}

/// Hann-windowed magnitude spectrum with 8x zero padding; returns
/// (frequency cm^-1, |FFT|) for non-negative frequencies.
pub fn periodogram(t_ps: &[f64], c: &[f64]) -> Result<Vec<(f64, f64)>> {
    if c.len() < 2 || t_ps.len() != c.len() {
        return Err(Error::Precondition("periodogram needs at least 2 matching samples".into()));
    }
    let dt = uniform_step(t_ps)?;
    let n = c.len();
    let nfft = (8 * n).next_power_of_two();
    let mut buf = vec![C64::new(0.0, 0.0); nfft];
    for (i, &x) in c.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos();
        buf[i] = C64::new(w * x, 0.0);
    }
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);
    let df = 1.0 / (nfft as f64 * dt * CM1_PER_PS);
    Ok((0..=nfft / 2).map(|k| (k as f64 * df, buf[k].norm())).collect())
}

/// Frequencies (cm^-1) of the local maxima of a periodogram above `rel` of its peak.
pub fn periodogram_peaks(spec: &[(f64, f64)], rel: f64) -> Vec<f64> {
    let top = spec.iter().fold(0.0f64, |a, p| a.max(p.1));
    (1..spec.len().saturating_sub(1))
        .filter(|&k| spec[k].1 > spec[k - 1].1 && spec[k].1 >= spec[k + 1].1 && spec[k].1 >= rel * top)
        .map(|k| spec[k].0)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tag {
    /// |E_v| of level v (index into the level list).
    Level(usize),
    /// |E_v - E_w|.
    Difference(usize, usize),
    /// |E_v| / 2.
    Half(usize),
}

impl std::fmt::Display for Tag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tag::Level(v) => write!(f, "E[{v}]"),
            Tag::Difference(v, w) => write!(f, "E[{v}]-E[{w}]"),
            Tag::Half(v) => write!(f, "E[{v}]/2"),
        }
    }
}

/// Every |E_v|, |E_v - E_w| and |E_v|/2 of the bound energies `levels_cm1`.
pub fn candidates(levels_cm1: &[f64]) -> Vec<(f64, Tag)> {
    let mut out = Vec::new();
    for (v, e) in levels_cm1.iter().enumerate() {
        out.push((e.abs(), Tag::Level(v)));
        out.push((0.5 * e.abs(), Tag::Half(v)));
        for (w, f) in levels_cm1.iter().enumerate().skip(v + 1) {
            out.push(((e - f).abs(), Tag::Difference(v, w)));
        }
    }
    out
}

/// Closest candidate within `tol` cm^-1; with `halves = false` only levels
/// and differences count.
pub fn tag_line(freq_cm1: f64, levels_cm1: &[f64], tol: f64, halves: bool) -> Option<(Tag, f64)> {
    candidates(levels_cm1)
        .into_iter()
        .filter(|(_, t)| halves || !matches!(t, Tag::Half(_)))
        .map(|(f, t)| (t, (f - freq_cm1).abs()))
        .filter(|&(_, d)| d <= tol)
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Sum of confidence x amplitude over lines above `min_confidence` that
/// match a level or a level difference within `tol`.
pub fn bound_line_weight(lines: &[SpectralLine], levels_cm1: &[f64], tol: f64, min_confidence: f64) -> f64 {
    lines
        .iter()
        .filter(|l| l.confidence > min_confidence && tag_line(l.frequency_cm1, levels_cm1, tol, false).is_some())
        .map(|l| l.confidence * l.amplitude)
        .sum()
}

/// `freq_cm1,amplitude,decay_cm1,confidence` after a `# config_hash=` line.
pub fn write_lines_csv<W: Write>(mut out: W, hash: &str, lines: &[SpectralLine]) -> Result<()> {
    writeln!(out, "# config_hash={hash}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["freq_cm1", "amplitude", "decay_cm1", "confidence"])?;
    for l in lines {
        w.write_record([
            format!("{:.9e}", l.frequency_cm1),
            format!("{:.9e}", l.amplitude),
            format!("{:.9e}", l.decay_cm1),
            format!("{:.6}", l.confidence),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cosine(f_cm1: f64, n: usize, dt: f64) -> (Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let c = t.iter().map(|&t| (2.0 * PI * CM1_PER_PS * f_cm1 * t).cos()).collect();
        (t, c)
    }

    #[test]
    fn single_cosine_exact() {
        let (t, c) = cosine(0.37, 256, 2.0);
        let inv = harmonic_inversion(&t, &c, &InversionOptions::default()).unwrap();
        assert_eq!(inv.lines.len(), 1);
        let l = inv.lines[0];
        assert!((l.frequency_cm1 - 0.37).abs() < 1e-8 * 0.37);
        assert!((l.amplitude - 1.0).abs() < 1e-8);
        assert!(l.decay_cm1.abs() < 1e-8);
        assert!(l.confidence > 0.999);
    }

    #[test]
    fn too_few_samples() {
        let (t, c) = cosine(0.37, 63, 2.0);
        assert!(matches!(harmonic_inversion(&t, &c, &InversionOptions::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn order_above_rank_is_ill_conditioned() {
        let (t, c) = cosine(0.37, 128, 2.0);
        let opts = InversionOptions { model_order: Some(12), ..Default::default() };
        match harmonic_inversion(&t, &c, &opts) {
            Err(Error::IllConditioned { condition, .. }) => assert!(condition > 1e13),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_peaks_at_zero() {
        let t: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let p = periodogram(&t, &vec![1.0; 100]).unwrap();
        let k = (0..p.len()).max_by(|&a, &b| p[a].1.total_cmp(&p[b].1)).unwrap();
        assert_eq!(k, 0);
    }

    #[test]
    fn cosine_main_lobe() {
        let (t, c) = cosine(1.1, 500, 2.0);
        let p = periodogram(&t, &c).unwrap();
        let k = (0..p.len()).max_by(|&a, &b| p[a].1.total_cmp(&p[b].1)).unwrap();
        let df = p[1].0;
        assert!((p[k].0 - 1.1).abs() <= df);
    }

    #[test]
    fn tagging() {
        let levels = [-3.0, -1.0, -0.25];
        assert_eq!(tag_line(2.01, &levels, 0.05, false).unwrap().0, Tag::Difference(0, 1));
        assert_eq!(tag_line(0.99, &levels, 0.05, false).unwrap().0, Tag::Level(1));
        assert!(tag_line(1.5, &levels, 0.05, false).is_none());
        assert_eq!(tag_line(1.5, &levels, 0.05, true).unwrap().0, Tag::Half(0));
    }
}
