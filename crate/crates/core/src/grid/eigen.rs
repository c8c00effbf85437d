//! Eigenpairs of grid Hamiltonians.
//!
//! Small grids are diagonalized densely. Larger grids use shift-invert
//! Lanczos with full reorthogonalization on top of a Bunch-Kaufman LDL^T
//! factorization of H - sigma; the inertia of D counts the eigenvalues below
//! sigma, which lets interval requests be sliced and checked for completeness.

use ndarray::{Array1, Array2};
use ndarray_linalg::{BKFactorized, Eigh, FactorizeHInto, SolveH, UPLO};

use super::GridHamiltonian;
use crate::error::{Error, Result};

/// Grids up to this size are diagonalized densely.
pub const DENSE_MAX: usize = 1024;

const MAX_PER_SLICE: usize = 32;
const MAX_KRYLOV: usize = 600;
const MAX_DEPTH: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Which {
    Lowest,
    Nearest(f64),
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub energy: f64,
    /// Real eigenvector normalized to sum |psi_i|^2 dr = 1.
    pub psi: Vec<f64>,
}

impl Eigenpair {
    pub fn nodes(&self) -> usize {
        super::node_count(&self.psi)
    }
}

pub fn eigensolve(h: &GridHamiltonian, count: usize, which: Which) -> Result<Vec<Eigenpair>> {
    let n = h.n();
    if count > n {
        return Err(Error::Precondition(format!("requested {count} eigenpairs from {n} grid points")));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    if n <= DENSE_MAX {
        let (e, v) = dense_eigh(h)?;
        let mut idx: Vec<usize> = (0..n).collect();
        if let Which::Nearest(target) = which {
            idx.sort_by(|&a, &b| (e[a] - target).abs().total_cmp(&(e[b] - target).abs()));
        }
        idx.truncate(count);
        idx.sort_unstable();
        let pairs = idx.into_iter().map(|i| finish_pair(h, e[i], v.column(i).to_vec())).collect();
        return Ok(pairs);
    }

    let base = h.dense();
    let scale = spectral_scale(h);
    let sigma = match which {
        Which::Lowest => h.v_min() - 1e-3 * scale,
        Which::Nearest(e) => e,
    };
    let si = ShiftInvert::new(&base, sigma, scale)?;
    let pairs = lanczos(h, &si, count, &|_| true, scale)?
        .ok_or(Error::NoConvergence { what: "shift-invert Lanczos", residual: f64::NAN })?;
    let mut pairs: Vec<Eigenpair> = pairs.into_iter().map(|(e, v)| finish_pair(h, e, v)).collect();
    pairs.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(pairs)
}

/// All eigenpairs with lo < E < hi, ascending.
pub fn eigensolve_interval(h: &GridHamiltonian, lo: f64, hi: f64) -> Result<Vec<Eigenpair>> {
    if !(hi > lo) {
        return Err(Error::Precondition(format!("empty energy interval [{lo}, {hi}]")));
    }
    let n = h.n();
    if n <= DENSE_MAX {
        let (e, v) = dense_eigh(h)?;
        return Ok((0..n)
            .filter(|&i| e[i] > lo && e[i] < hi)
            .map(|i| finish_pair(h, e[i], v.column(i).to_vec()))
            .collect());
    }
    let base = h.dense();
    let scale = spectral_scale(h);
    let n_lo = if lo < h.v_min() { 0 } else { ShiftInvert::new(&base, lo, scale)?.below };
    let n_hi = ShiftInvert::new(&base, hi, scale)?.below;
    let mut out = Vec::new();
    slice(h, &base, scale, lo, hi, n_lo, n_hi, 0, &mut out)?;
    let mut out: Vec<Eigenpair> = out.into_iter().map(|(e, v)| finish_pair(h, e, v)).collect();
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(out)
}

/// Number of eigenvalues of `h` below `sigma` (Sylvester inertia).
pub fn inertia_count(h: &GridHamiltonian, sigma: f64) -> Result<usize> {
    Ok(ShiftInvert::new(&h.dense(), sigma, spectral_scale(h))?.below)
}

#[allow(clippy::too_many_arguments)]
fn slice(
    h: &GridHamiltonian,
    base: &Array2<f64>,
    scale: f64,
    lo: f64,
    hi: f64,
    n_lo: usize,
    n_hi: usize,
    depth: usize,
    out: &mut Vec<(f64, Vec<f64>)>,
) -> Result<()> {
    let count = n_hi.saturating_sub(n_lo);
    if count == 0 {
        return Ok(());
    }
    if depth > MAX_DEPTH {
        return Err(Error::NoConvergence { what: "spectrum slicing", residual: hi - lo });
    }
    let mid = 0.5 * (lo + hi);
    let si = ShiftInvert::new(base, mid, scale)?;
    if count <= MAX_PER_SLICE {
        let inside = |e: f64| e > lo && e < hi;
        if let Some(found) = lanczos(h, &si, count, &inside, scale)? {
            out.extend(found);
            return Ok(());
        }
    }
    let n_mid = si.below;
    drop(si);
    slice(h, base, scale, lo, mid, n_lo, n_mid, depth + 1, out)?;
    slice(h, base, scale, mid, hi, n_mid, n_hi, depth + 1, out)
}

fn spectral_scale(h: &GridHamiltonian) -> f64 {
    let (a, b) = h.spectral_bounds();
    a.abs().max(b.abs())
}

fn dense_eigh(h: &GridHamiltonian) -> Result<(Array1<f64>, Array2<f64>)> {
    let (e, v) = h.dense().eigh(UPLO::Upper)?;
    Ok((e, v))
}

struct ShiftInvert {
    sigma: f64,
    fact: BKFactorized<ndarray::OwnedRepr<f64>>,
    below: usize,
}

impl ShiftInvert {
    fn new(base: &Array2<f64>, sigma: f64, scale: f64) -> Result<ShiftInvert> {
        let mut shift = sigma;
        for attempt in 0..4 {
            let mut a = base.clone();
            for i in 0..a.nrows() {
                a[[i, i]] -= shift;
            }
            match a.factorizeh_into() {
                Ok(fact) => {
                    let below = bk_negative_count(&fact);
                    return Ok(ShiftInvert { sigma: shift, fact, below });
                }
                Err(e) if attempt == 3 => return Err(e.into()),
                Err(_) => shift += 1e-13 * scale * (attempt + 1) as f64,
            }
        }
        unreachable!()
    }

    fn solve(&self, b: &mut Array1<f64>) -> Result<()> {
        self.fact.solveh_inplace(b)?;
        Ok(())
    }
}

/// Negative eigenvalues of the block-diagonal D in the upper BK factor.
fn bk_negative_count(f: &BKFactorized<ndarray::OwnedRepr<f64>>) -> usize {
    let a = &f.a;
    let ipiv = &f.ipiv;
    let mut neg = 0;
    let mut k = a.nrows() as isize - 1;
    while k >= 0 {
        let ku = k as usize;
        if ipiv[ku] > 0 || ku == 0 {
            if a[[ku, ku]] < 0.0 {
                neg += 1;
            }
            k -= 1;
        } else {
            let (d11, d22, d12) = (a[[ku - 1, ku - 1]], a[[ku, ku]], a[[ku - 1, ku]]);
            let det = d11 * d22 - d12 * d12;
            if det < 0.0 {
                neg += 1;
            } else if d11 + d22 < 0.0 {
                neg += 2;
            }
            k -= 2;
        }
    }
    neg
}

fn start_vector(n: usize) -> Array1<f64> {
    let golden = 0.618_033_988_749_894_9;
    let v = Array1::from_iter((0..n).map(|i| ((i as f64 + 1.0) * golden).fract() - 0.5 + 0.1));
    let nrm = v.dot(&v).sqrt();
    v / nrm
}

/// Shift-invert Lanczos. Returns `need` converged eigenpairs accepted by
/// `want` (those nearest sigma), or `None` if the Krylov budget ran out.
fn lanczos(
    h: &GridHamiltonian,
    si: &ShiftInvert,
    need: usize,
    want: &dyn Fn(f64) -> bool,
    scale: f64,
) -> Result<Option<Vec<(f64, Vec<f64>)>>> {
    let n = h.n();
    let m_max = MAX_KRYLOV.min(n);
    let tol = 1e-12 * scale;
    let mut basis: Vec<Array1<f64>> = Vec::with_capacity(m_max + 1);
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    basis.push(start_vector(n));
    let mut next_check = (need + 10).min(m_max);

    for j in 0..m_max {
        let mut w = basis[j].clone();
        si.solve(&mut w)?;
        let a = w.dot(&basis[j]);
        alpha.push(a);
        for _ in 0..2 {
            for v in &basis {
                let c = w.dot(v);
                w.scaled_add(-c, v);
            }
        }
        let b = w.dot(&w).sqrt();
        let exhausted = b <= 1e-14 * a.abs().max(1e-300) || j + 1 == m_max;
        if j + 1 >= next_check || exhausted {
            next_check = j + 1 + (j / 4).max(10);
            if let Some(found) = ritz(h, si, &basis, &alpha, &beta, b, need, want, tol)? {
                return Ok(Some(found));
            }
        }
        if exhausted {
            return Ok(None);
        }
        beta.push(b);
        basis.push(w / b);
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn ritz(
    h: &GridHamiltonian,
    si: &ShiftInvert,
    basis: &[Array1<f64>],
    alpha: &[f64],
    beta: &[f64],
    b_last: f64,
    need: usize,
    want: &dyn Fn(f64) -> bool,
    tol: f64,
) -> Result<Option<Vec<(f64, Vec<f64>)>>> {
    let m = alpha.len();
    let mut t = Array2::<f64>::zeros((m, m));
    for i in 0..m {
        t[[i, i]] = alpha[i];
        if i + 1 < m {
            t[[i, i + 1]] = beta[i];
            t[[i + 1, i]] = beta[i];
        }
    }
    let (theta, s) = t.eigh(UPLO::Upper)?;
    let mut order: Vec<usize> = (0..m).filter(|&i| theta[i] != 0.0).collect();
    order.sort_by(|&a, &b| theta[b].abs().total_cmp(&theta[a].abs()));

    let mut picked = Vec::new();
    for &i in &order {
        let lambda = si.sigma + 1.0 / theta[i];
        if !want(lambda) {
            continue;
        }
        let est = (b_last * s[[m - 1, i]]).abs() / (theta[i] * theta[i]);
        if est > tol {
            return Ok(None);
        }
        picked.push(i);
        if picked.len() == need {
            break;
        }
    }
    if picked.len() < need {
        return Ok(None);
    }
    let mut out = Vec::with_capacity(need);
    for i in picked {
        let mut x = Array1::<f64>::zeros(h.n());
        for (k, v) in basis.iter().take(m).enumerate() {
            x.scaled_add(s[[k, i]], v);
        }
        let lambda = si.sigma + 1.0 / theta[i];
        let xv = x.to_vec();
        let hx = h.apply_real(&xv)?;
        let res = hx.iter().zip(&xv).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
        let nrm = xv.iter().map(|a| a * a).sum::<f64>().sqrt();
        if res / nrm > 100.0 * tol {
            return Ok(None);
        }
        let lambda = rayleigh(&xv, &hx);
        out.push((lambda, xv));
    }
    Ok(Some(out))
}

fn rayleigh(x: &[f64], hx: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(hx).map(|(a, b)| a * b).sum();
    let den: f64 = x.iter().map(|a| a * a).sum();
    num / den
}

fn finish_pair(h: &GridHamiltonian, energy: f64, mut psi: Vec<f64>) -> Eigenpair {
    let nrm = (psi.iter().map(|x| x * x).sum::<f64>() * h.grid.dr).sqrt();
    let peak = psi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let first = psi.iter().find(|x| x.abs() > 1e-3 * peak).copied().unwrap_or(1.0);
    let s = if first < 0.0 { -1.0 / nrm } else { 1.0 / nrm };
    psi.iter_mut().for_each(|x| *x *= s);
    Eigenpair { energy, psi }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn harmonic(n: usize, mass: f64, omega: f64) -> GridHamiltonian {
        let g = Grid::new(-12.0, 12.0, n).unwrap();
        let v = g.points().iter().map(|x| 0.5 * mass * omega * omega * x * x).collect();
        GridHamiltonian::new(g, v, mass, 0).unwrap()
    }

    #[test]
    fn inertia_matches_dense_spectrum() {
        let h = harmonic(256, 1.0, 1.0);
        let base = h.dense();
        let (e, _) = dense_eigh(&h).unwrap();
        for &sigma in &[0.2, 1.7, 3.05, 10.4, 40.0] {
            let si = ShiftInvert::new(&base, sigma, 50.0).unwrap();
            let expect = e.iter().filter(|&&x| x < sigma).count();
            assert_eq!(si.below, expect, "sigma = {sigma}");
        }
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let h = harmonic(256, 1.0, 1.0);
        let (e, _) = dense_eigh(&h).unwrap();
        let base = h.dense();
        let scale = spectral_scale(&h);
        let si = ShiftInvert::new(&base, 5.2, scale).unwrap();
        let got = lanczos(&h, &si, 4, &|_| true, scale).unwrap().unwrap();
        let mut ev: Vec<f64> = got.iter().map(|p| p.0).collect();
        ev.sort_by(f64::total_cmp);
        let mut want: Vec<f64> = e.iter().cloned().collect();
        want.sort_by(|a, b| (a - 5.2).abs().total_cmp(&(b - 5.2).abs()));
        let mut want = want[..4].to_vec();
        want.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn slicing_finds_every_level() {
        let h = harmonic(2048, 1.0, 1.0);
        let got = eigensolve_interval(&h, 0.0, 20.0).unwrap();
        assert_eq!(got.len(), 20);
        for (v, p) in got.iter().enumerate() {
            assert!((p.energy - (v as f64 + 0.5)).abs() < 1e-8, "{v}: {}", p.energy);
            assert_eq!(p.nodes(), v);
        }
    }
}
