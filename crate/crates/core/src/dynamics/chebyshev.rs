use crate::error::{Error, Result};
use crate::grid::GridHamiltonian;
use crate::C64;

/// Bessel functions J_0..J_kmax at `x` by Miller's backward recurrence,
/// normalized with J_0 + 2 sum J_2k = 1.
pub fn bessel_j_all(kmax: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut v = vec![0.0; kmax + 1];
        v[0] = 1.0;
        return v;
    }
    let ax = x.abs();
    let start = (kmax.max(ax as usize) + 40 + (10.0 * ax.cbrt()) as usize) | 1;
    let mut vals = vec![0.0f64; start + 2];
    vals[start + 1] = 0.0;
    vals[start] = 1e-300;
    for k in (1..=start).rev() {
        vals[k - 1] = 2.0 * k as f64 / ax * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let mut norm = vals[0];
    for k in (2..=start).step_by(2) {
        norm += 2.0 * vals[k];
    }
    let mut out: Vec<f64> = vals[..=kmax].iter().map(|v| v / norm).collect();
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// exp(-i H dt) by Chebyshev expansion over a fixed spectral interval.
#[derive(Debug, Clone)]
pub struct ChebyshevPropagator {
    pub dt: f64,
    e_mid: f64,
    half_span: f64,
    coeffs: Vec<C64>,
}

impl ChebyshevPropagator {
    /// `bounds` enclose the spectrum of every Hamiltonian this will be applied to.
    pub fn new(bounds: (f64, f64), dt: f64, tol: f64) -> Result<ChebyshevPropagator> {
        let (lo, hi) = bounds;
        if !(hi > lo) {
            return Err(Error::SpectralBounds(format!("empty interval [{lo}, {hi}]")));
        }
        let e_mid = 0.5 * (hi + lo);
        let half_span = 0.5 * (hi - lo);
        let alpha = half_span * dt;
        let kmax = (alpha + 30.0 + 10.0 * alpha.cbrt()) as usize;
        let j = bessel_j_all(kmax, alpha);
        let mut nterms = j.len();
        for k in (alpha.ceil() as usize)..j.len() {
            if j[k].abs() < tol {
                nterms = k;
                break;
            }
        }
        let phase = C64::from_polar(1.0, -e_mid * dt);
        let mut minus_i_pow = C64::new(1.0, 0.0);
        let coeffs = (0..nterms)
            .map(|k| {
                let c = phase * minus_i_pow * j[k] * if k == 0 { 1.0 } else { 2.0 };
                minus_i_pow *= C64::new(0.0, -1.0);
                c
            })
            .collect();
        Ok(ChebyshevPropagator { dt, e_mid, half_span, coeffs })
    }

    /// Spectral bounds of `h` widened by `margin` of the span on both sides.
    pub fn bounds_for(h: &GridHamiltonian, margin: f64) -> (f64, f64) {
        let (lo, hi) = h.spectral_bounds();
        let span = hi - lo;
        (lo - margin * span, hi + margin * span)
    }

    pub fn terms(&self) -> usize {
        self.coeffs.len()
    }

    /// psi <- exp(-i H dt) psi.
    pub fn apply(&self, h: &GridHamiltonian, psi: &mut [C64], work: &mut ChebyshevWork) -> Result<()> {
        let n = psi.len();
        work.ensure(n, h.kinetic().scratch_len());
        let ChebyshevWork { prev, cur, next, acc, scratch } = work;
        let inv = 1.0 / self.half_span;
        let shifted = |x: &[C64], out: &mut [C64], scratch: &mut [C64]| {
            h.apply_into(x, out, scratch);
            for (o, xi) in out.iter_mut().zip(x) {
                *o = (*o - xi * self.e_mid) * inv;
            }
        };
        let norm0: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prev[..n].copy_from_slice(psi);
        for (a, p) in acc.iter_mut().zip(psi.iter()) {
            *a = p * self.coeffs[0];
        }
        if self.coeffs.len() > 1 {
            shifted(&prev[..n], &mut cur[..n], scratch);
            for (a, c) in acc.iter_mut().zip(cur.iter()) {
                *a += c * self.coeffs[1];
            }
        }
        for k in 2..self.coeffs.len() {
            shifted(&cur[..n], &mut next[..n], scratch);
            let ck = self.coeffs[k];
            for i in 0..n {
                let v = next[i] * 2.0 - prev[i];
                next[i] = v;
                acc[i] += v * ck;
            }
            std::mem::swap(prev, cur);
            std::mem::swap(cur, next);
        }
        let last: f64 = cur[..n].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if last > 2.0 * norm0 {
            return Err(Error::SpectralBounds(format!(
                "Chebyshev vectors grew by {:.3e}; spectrum exceeds [{:.6e}, {:.6e}]",
                last / norm0,
                self.e_mid - self.half_span,
                self.e_mid + self.half_span
            )));
        }
        psi.copy_from_slice(&acc[..n]);
        Ok(())
    }
}

#[derive(Debug, Default)]
pub struct ChebyshevWork {
    prev: Vec<C64>,
    cur: Vec<C64>,
    next: Vec<C64>,
    acc: Vec<C64>,
    scratch: Vec<C64>,
}

impl ChebyshevWork {
    pub fn new() -> Self {
        Self::default()
    }

    fn ensure(&mut self, n: usize, scratch: usize) {
        let z = C64::new(0.0, 0.0);
        for v in [&mut self.prev, &mut self.cur, &mut self.next, &mut self.acc] {
            v.resize(n, z);
        }
        self.scratch.resize(scratch.max(1), z);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(k: usize, x: f64) -> f64 {
        let mut term = (x / 2.0).powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>();
        let mut sum = term;
        for m in 1..80 {
            term *= -(x * x / 4.0) / (m as f64 * (m + k) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn matches_power_series() {
        for &x in &[0.3, 1.0, 4.5, 9.0] {
            let j = bessel_j_all(12, x);
            for k in 0..=12 {
                assert!((j[k] - series(k, x)).abs() < 1e-13, "J_{k}({x})");
            }
        }
    }

    #[test]
    fn large_argument_reference_values() {
        // scipy.special.jv
        let j = bessel_j_all(120, 100.0);
        assert!((j[0] - 0.019_985_850_304_223_122).abs() < 1e-13);
        assert!((j[1] - (-0.077_145_352_014_112_14)).abs() < 1e-13);
        assert!((j[50] - (-0.038_698_339_728_525_63)).abs() < 1e-13);
        assert!((j[110] - 0.002_971_864_163_119_063_2).abs() < 1e-13);
    }

    #[test]
    fn negative_argument_parity() {
        let a = bessel_j_all(5, 3.0);
        let b = bessel_j_all(5, -3.0);
        for k in 0..=5 {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((a[k] * s - b[k]).abs() < 1e-15);
        }
    }
}
