//! Initial pair states: single scattering states, thermal ensembles, and
//! phase shifts with resonance detection.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::{eigensolve, eigensolve_interval, Eigenpair, Grid, GridHamiltonian, Which};
use crate::potentials::ChannelPotential;
use crate::units::{au_to_uk, uk_to_au, HARTREE_K};

/// Box-normalized scattering state with energy closest to `target_uk`
/// above the asymptote of `h`.
pub fn scattering_state(h: &GridHamiltonian, target_uk: f64) -> Result<Eigenpair> {
    let asymptote = h.potential[h.n() - 1];
    let target = uk_to_au(target_uk);
    if target <= asymptote {
        return Err(Error::Precondition(format!(
            "target energy {target_uk} uK lies at or below the asymptote ({:.4} uK)",
            au_to_uk(asymptote)
        )));
    }
    let mut pairs = eigensolve(h, 3, Which::Nearest(target))?;
    pairs.retain(|p| p.energy > asymptote);
    pairs
        .into_iter()
        .min_by(|a, b| (a.energy - target).abs().total_cmp(&(b.energy - target).abs()))
        .ok_or_else(|| Error::Precondition(format!("no continuum state near {target_uk} uK")))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleOptions {
    pub temperature_uk: f64,
    /// Members above this energy are dropped; defaults to 10 k_B T.
    pub cutoff_uk: Option<f64>,
    pub j_max: u32,
    pub even_j_only: bool,
    /// Minimum fraction of the Boltzmann mass the cutoff must retain.
    pub min_coverage: f64,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        EnsembleOptions { temperature_uk: 100.0, cutoff_uk: None, j_max: 8, even_j_only: true, min_coverage: 0.999 }
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleMember {
    pub j: u32,
    /// Hartree.
    pub energy: f64,
    pub weight: f64,
    pub psi: Vec<f64>,
}

impl EnsembleMember {
    pub fn energy_uk(&self) -> f64 {
        au_to_uk(self.energy)
    }
}

#[derive(Debug, Clone)]
pub struct ThermalEnsemble {
    pub grid: Grid,
    pub temperature_uk: f64,
    pub members: Vec<EnsembleMember>,
    /// Estimated fraction of the Boltzmann mass below the cutoff.
    pub coverage: f64,
}

impl ThermalEnsemble {
    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|m| m.weight).sum()
    }

    /// Writes `J,E_uK,weight` rows after a `# config_hash=` line.
    pub fn write_csv<W: Write>(&self, mut out: W, hash: &str) -> Result<()> {
        writeln!(out, "# config_hash={hash}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["J", "E_uK", "weight"])?;
        for m in &self.members {
            w.write_record([m.j.to_string(), format!("{:.9e}", m.energy_uk()), format!("{:.12e}", m.weight)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Boltzmann-weighted box states of one channel with weights
/// (2J+1) exp(-E/kT) / Z over every included J.
pub fn build_ensemble(grid: &Grid, pot: &ChannelPotential, mass: f64, opts: &EnsembleOptions) -> Result<ThermalEnsemble> {
    let t = opts.temperature_uk;
    if !(t > 0.0) {
        return Err(Error::config("ensemble.temperature_uk", format!("must be positive, got {t}")));
    }
    let cutoff_uk = opts.cutoff_uk.unwrap_or(10.0 * t);
    if !(cutoff_uk > 0.0) {
        return Err(Error::config("ensemble.cutoff_uk", format!("must be positive, got {cutoff_uk}")));
    }
    let kt = uk_to_au(t);
    let cutoff = uk_to_au(cutoff_uk) + pot.asymptote;
    let length = grid.r_max - grid.r_min;
    let step = if opts.even_j_only { 2 } else { 1 };
    let mut raw = Vec::new();
    let (mut kept, mut tail) = (0.0, 0.0);
    for j in (0..=opts.j_max).step_by(step) {
        let h = GridHamiltonian::from_channel(grid.clone(), pot, j, mass);
        let asymptote = h.potential[h.n() - 1];
        let g = (2 * j + 1) as f64;
        for p in eigensolve_interval(&h, asymptote, cutoff)? {
            let b = g * (-(p.energy - pot.asymptote) / kt).exp();
            kept += b;
            raw.push((j, p, b));
        }
        // Free-particle density of states beyond the cutoff.
        let x = ((cutoff - asymptote) / kt).max(0.0);
        tail += g * length * (2.0 * mass).sqrt() / (2.0 * PI) * (PI * kt).sqrt() * libm::erfc(x.sqrt());
    }
    if raw.is_empty() {
        return Err(Error::Precondition(format!("no box states below the {cutoff_uk} uK cutoff")));
    }
    let coverage = kept / (kept + tail);
    if coverage < opts.min_coverage {
        return Err(Error::config(
            "ensemble.cutoff_uk",
            format!("cutoff {cutoff_uk} uK keeps only {:.5} of the Boltzmann mass", coverage),
        ));
    }
    let members = raw
        .into_iter()
        .map(|(j, p, b)| EnsembleMember { j, energy: p.energy, weight: b / kept, psi: p.psi })
        .collect();
    Ok(ThermalEnsemble { grid: grid.clone(), temperature_uk: t, members, coverage })
}

/// k_B T in hartree for a temperature in kelvin.
pub fn thermal_energy(kelvin: f64) -> f64 {
    kelvin / HARTREE_K
}

/// Riccati-Bessel functions x j_l(x) and x y_l(x).
pub fn riccati_bessel(l: u32, x: f64) -> (f64, f64) {
    let (s, c) = x.sin_cos();
    let mut y_prev = -c / x;
    let mut y = if l == 0 { y_prev } else { -c / (x * x) - s / x };
    for k in 1..l {
        let next = (2 * k + 1) as f64 / x * y - y_prev;
        y_prev = y;
        y = next;
    }
    (x * spherical_j(l, x), x * y)
}

fn spherical_j(l: u32, x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    if l == 0 {
        return j0;
    }
    if x > l as f64 {
        let (mut a, mut b) = (j0, j1);
        for k in 1..l {
            let next = (2 * k + 1) as f64 / x * b - a;
            a = b;
            b = next;
        }
        return b;
    }
    let start = l as usize + 20 + x as usize;
    let mut vals = vec![0.0f64; start + 2];
    vals[start] = 1e-300;
    for k in (1..=start).rev() {
        vals[k - 1] = (2 * k + 1) as f64 / x * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            vals[k - 1..].iter_mut().for_each(|v| *v *= 1e-250);
        }
    }
    if j0.abs() > j1.abs() {
        vals[l as usize] * j0 / vals[0]
    } else {
        vals[l as usize] * j1 / vals[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumerovOptions {
    /// Start of integration, where u = 0. `None` places it inside the wall.
    pub r_start: Option<f64>,
    /// Outer matching radius. `None` chooses the smallest radius where the
    /// potential is below `range_tol` times the collision energy.
    pub r_match: Option<f64>,
    pub step: f64,
    pub range_tol: f64,
}

impl Default for NumerovOptions {
    fn default() -> Self {
        NumerovOptions { r_start: None, r_match: None, step: 0.005, range_tol: 1e-3 }
    }
}

/// Phase shift of `pot` in partial wave `j` at energy `e` (hartree above the
/// asymptote). Absolute: branch fixed by counting nodes, so delta(E) is
/// continuous in E and obeys Levinson's theorem.
pub fn phase_shift(pot: &ChannelPotential, mass: f64, j: u32, e: f64, opts: &NumerovOptions) -> Result<f64> {
    let r_start = match opts.r_start {
        Some(r) => r,
        None => inner_start(pot, e),
    };
    let r_match = match opts.r_match {
        Some(r) => r,
        None => auto_match(pot, e, opts.range_tol, r_start),
    };
    let v = |r: f64| pot.value(r) - pot.asymptote;
    phase_shift_with(&v, mass, j, e, r_start, r_match, opts)
}

fn inner_start(pot: &ChannelPotential, e: f64) -> f64 {
    let mut r = pot.r_wall;
    while r > 0.05 && pot.value(r) - pot.asymptote - e < 30.0 * pot.depth {
        r -= 0.01;
    }
    r.max(0.05)
}

fn auto_match(pot: &ChannelPotential, e: f64, tol: f64, r_start: f64) -> f64 {
    let mut r = (r_start + 50.0).max(2.0 * pot.r_wall);
    while (pot.value(r) - pot.asymptote).abs() > 0.1 * tol * e && r < 1e6 {
        r *= 1.05;
    }
    r
}

/// Numerov integration of u'' = 2 mass (V + J(J+1)/(2 mass r^2) - E) u from
/// u(r_start) = 0, matched to Riccati-Bessel functions at `r_match`.
pub fn phase_shift_with(
    v: &dyn Fn(f64) -> f64,
    mass: f64,
    j: u32,
    e: f64,
    r_start: f64,
    r_match: f64,
    opts: &NumerovOptions,
) -> Result<f64> {
    if !(e > 0.0) {
        return Err(Error::Precondition(format!("collision energy {e} must be positive")));
    }
    if !(r_match > r_start) || !(r_start > 0.0) {
        return Err(Error::Precondition(format!("need 0 < r_start < r_match, got {r_start}, {r_match}")));
    }
    if v(r_match).abs() > opts.range_tol * e {
        return Err(Error::Precondition(format!(
            "r_match = {r_match} bohr lies inside the potential range: |V| = {:.3e} exceeds {} E",
            v(r_match).abs(),
            opts.range_tol
        )));
    }
    let k = (2.0 * mass * e).sqrt();
    let lambda = 2.0 * PI / k;
    let h = opts.step.min(lambda / 40.0);
    let n_b = ((r_match - r_start) / h).round() as usize;
    let h = (r_match - r_start) / n_b as f64;
    let gap = ((0.25 * lambda).min(0.25 * (r_match - r_start)) / h).round().max(1.0) as usize;
    let n_a = n_b - gap;

    let ll = (j * (j + 1)) as f64;
    let h12 = h * h / 12.0;
    let f = |r: f64| 2.0 * mass * (v(r) - e) + ll / (r * r);
    let mut u_prev = 0.0;
    let mut u = 1e-20;
    let mut w_prev = 0.0;
    let mut w = (1.0 - h12 * f(r_start + h)) * u;
    let mut nodes = 0usize;
    let mut u_a = 0.0;
    if n_a == 1 {
        u_a = u;
    }
    for i in 2..=n_b {
        let r_cur = r_start + (i - 1) as f64 * h;
        let w_next = 2.0 * w - w_prev + h * h * f(r_cur) * u;
        let r_next = r_start + i as f64 * h;
        let u_next = w_next / (1.0 - h12 * f(r_next));
        if u_next * u < 0.0 || (u_next == 0.0 && u != 0.0) {
            nodes += 1;
        }
        w_prev = w;
        w = w_next;
        u_prev = u;
        u = u_next;
        if i == n_a {
            u_a = u;
        }
        if u.abs() > 1e200 {
            w *= 1e-200;
            w_prev *= 1e-200;
            u *= 1e-200;
            u_prev *= 1e-200;
            u_a *= 1e-200;
        }
    }
    let _ = u_prev;
    let u_b = u;
    let r_a = r_start + n_a as f64 * h;
    let (ja, na) = riccati_bessel(j, k * r_a);
    let (jb, nb) = riccati_bessel(j, k * r_match);
    let num = u_b * ja - u_a * jb;
    let den = u_b * na - u_a * nb;
    let mut d = (num / den).atan();
    if !d.is_finite() {
        d = 0.5 * PI;
    }

    let x = k * r_match;
    let phi = free_angle(j, x);
    let frac = (phi + d).rem_euclid(PI);
    // Consistency between the fractional phase and the sign of u at r_match.
    let expected_sign = if nodes % 2 == 0 { 1.0 } else { -1.0 };
    let mut n_eff = nodes as f64;
    if u_b.signum() != expected_sign {
        if frac > 0.5 * PI {
            n_eff -= 1.0;
        } else {
            n_eff += 1.0;
        }
    }
    Ok(n_eff * PI + frac - phi)
}

/// Continuous angle of (x j_l, -x y_l), zero at the origin.
fn free_angle(l: u32, x: f64) -> f64 {
    let steps = ((x / 0.05).ceil() as usize).max(1);
    let mut zeros = 0usize;
    let mut prev = riccati_bessel(l, 1e-3 * x / steps as f64 + x / steps as f64 * 0.5).0;
    for i in 1..=steps {
        let xi = x * i as f64 / steps as f64;
        let cur = riccati_bessel(l, xi).0;
        if cur * prev < 0.0 {
            zeros += 1;
        }
        prev = cur;
    }
    let (jh, nh) = riccati_bessel(l, x);
    let base = jh.atan2(-nh).rem_euclid(PI);
    zeros as f64 * PI + if jh.abs() < 1e-300 { 0.0 } else { base }
}

/// Phase shifts on `energies_uk`, refined until neighbouring samples differ
/// by less than `max_jump` radians. Returns (E_uK, delta) sorted by energy.
pub fn scan_phase(
    pot: &ChannelPotential,
    mass: f64,
    j: u32,
    energies_uk: &[f64],
    max_jump: f64,
    opts: &NumerovOptions,
) -> Result<Vec<(f64, f64)>> {
    scan_by(&|e_uk: f64| phase_shift(pot, mass, j, uk_to_au(e_uk), opts), energies_uk, max_jump)
}

fn scan_by(eval: &dyn Fn(f64) -> Result<f64>, energies_uk: &[f64], max_jump: f64) -> Result<Vec<(f64, f64)>> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(energies_uk.len());
    for &e in energies_uk {
        let d = eval(e)?;
        if let Some(&(e0, d0)) = out.last() {
            refine(eval, e0, d0, e, d, max_jump, 0, &mut out)?;
        }
        out.push((e, d));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn refine(
    eval: &dyn Fn(f64) -> Result<f64>,
    e0: f64,
    d0: f64,
    e1: f64,
    d1: f64,
    max_jump: f64,
    depth: usize,
    out: &mut Vec<(f64, f64)>,
) -> Result<()> {
    if (d1 - d0).abs() <= max_jump || depth >= 20 {
        return Ok(());
    }
    let em = 0.5 * (e0 + e1);
    let dm = eval(em)?;
    refine(eval, e0, d0, em, dm, max_jump, depth + 1, out)?;
    out.push((em, dm));
    refine(eval, em, dm, e1, d1, max_jump, depth + 1, out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub j: u32,
    pub energy_uk: f64,
    /// Full width at half maximum of d delta / dE.
    pub width_uk: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResonanceTable {
    pub rows: Vec<Resonance>,
}

impl ResonanceTable {
    pub fn for_j(&self, j: u32) -> impl Iterator<Item = &Resonance> {
        self.rows.iter().filter(move |r| r.j == j)
    }

    /// Writes `J,E_uK,width_uK` rows after a `# config_hash=` line.
    pub fn write_csv<W: Write>(&self, mut out: W, hash: &str) -> Result<()> {
        writeln!(out, "# config_hash={hash}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["J", "E_uK", "width_uK"])?;
        for r in &self.rows {
            w.write_record([r.j.to_string(), format!("{:.9e}", r.energy_uk), format!("{:.9e}", r.width_uk)])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceSearch {
    pub e_min_uk: f64,
    pub e_max_uk: f64,
    pub samples: usize,
    /// Minimum phase rise across E_r +- width for a peak to count.
    pub min_rise: f64,
}

impl Default for ResonanceSearch {
    fn default() -> Self {
        ResonanceSearch { e_min_uk: 1.0, e_max_uk: 1000.0, samples: 400, min_rise: 0.25 * PI }
    }
}

/// Interior maxima of d delta / dE fitted with Lorentzians.
pub fn find_resonances(
    pot: &ChannelPotential,
    mass: f64,
    js: &[u32],
    search: &ResonanceSearch,
    opts: &NumerovOptions,
) -> Result<ResonanceTable> {
    find_resonances_by(&|j, e_uk| phase_shift(pot, mass, j, uk_to_au(e_uk), opts), js, search)
}

/// Resonance search over an arbitrary phase function `phase(j, E_uK)`.
pub fn find_resonances_by(
    phase: &dyn Fn(u32, f64) -> Result<f64>,
    js: &[u32],
    search: &ResonanceSearch,
) -> Result<ResonanceTable> {
    if !(search.e_max_uk > search.e_min_uk && search.e_min_uk > 0.0) || search.samples < 5 {
        return Err(Error::config("resonances.energy_range_uk", "need 0 < e_min < e_max and at least 5 samples"));
    }
    let mut rows = Vec::new();
    for &j in js {
        let grid: Vec<f64> = (0..search.samples)
            .map(|i| search.e_min_uk + (search.e_max_uk - search.e_min_uk) * i as f64 / (search.samples - 1) as f64)
            .collect();
        let eval = |e_uk: f64| phase(j, e_uk);
        let scan = scan_by(&eval, &grid, 0.2)?;
        let deriv: Vec<f64> = (1..scan.len() - 1)
            .map(|i| (scan[i + 1].1 - scan[i - 1].1) / (scan[i + 1].0 - scan[i - 1].0))
            .collect();
        for i in 1..deriv.len().saturating_sub(1) {
            if !(deriv[i] > deriv[i - 1] && deriv[i] >= deriv[i + 1] && deriv[i] > 0.0) {
                continue;
            }
            let (lo, hi) = (scan[i].0, scan[i + 2].0);
            let Some((er, gamma)) = fit_lorentzian(&eval, lo, hi)? else { continue };
            if !(er > search.e_min_uk && er < search.e_max_uk) || gamma >= er {
                continue;
            }
            let rise = eval(er + gamma)? - eval((er - gamma).max(0.5 * er))?;
            if rise < search.min_rise {
                continue;
            }
            if rows.iter().any(|r: &Resonance| r.j == j && (r.energy_uk - er).abs() < 0.5 * gamma) {
                continue;
            }
            rows.push(Resonance { j, energy_uk: er, width_uk: gamma });
        }
    }
    Ok(ResonanceTable { rows })
}

/// Fits 1 / (d delta / dE) with a parabola around the peak inside [lo, hi];
/// returns (E_r, Gamma) in uK.
fn fit_lorentzian(eval: &dyn Fn(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<Option<(f64, f64)>> {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..8 {
        let m = 41;
        let eps = (b - a) / 2000.0;
        let mut pts = Vec::with_capacity(m);
        for i in 0..m {
            let e = a + (b - a) * i as f64 / (m - 1) as f64;
            let d = (eval(e + eps)? - eval((e - eps).max(0.5 * e))?) / (e + eps - (e - eps).max(0.5 * e));
            pts.push((e, d));
        }
        let (imax, &(e_pk, f_pk)) =
            pts.iter().enumerate().max_by(|x, y| x.1 .1.total_cmp(&y.1 .1)).expect("non-empty");
        if f_pk <= 0.0 {
            return Ok(None);
        }
        let upper: Vec<(f64, f64)> = pts.iter().copied().filter(|p| p.1 >= 0.5 * f_pk).collect();
        let edge = imax == 0 || imax == m - 1;
        if upper.len() >= 7 && !edge {
            let fit = quadratic_fit(&upper.iter().map(|&(e, d)| (e - e_pk, 1.0 / d)).collect::<Vec<_>>());
            let Some((c2, c1, _c0)) = fit else { return Ok(None) };
            if c2 <= 0.0 {
                return Ok(None);
            }
            let er = e_pk - c1 / (2.0 * c2);
            return Ok(Some((er, 2.0 / c2)));
        }
        // Too coarse or off-centre: zoom in on the peak.
        let half = if edge { b - a } else { (b - a) / 8.0 };
        a = (e_pk - half).max(0.5 * lo);
        b = e_pk + half;
    }
    Ok(None)
}

fn quadratic_fit(p: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for &(x, y) in p {
        let mut xp = 1.0;
        for (k, sk) in s.iter_mut().enumerate() {
            *sk += xp;
            if k < 3 {
                t[k] += xp * y;
            }
            xp *= x;
        }
    }
    // Normal equations for y = c0 + c1 x + c2 x^2.
    let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut c = [0.0; 3];
    for (k, ck) in c.iter_mut().enumerate() {
        let mut mk = m;
        for row in 0..3 {
            mk[row][k] = t[row];
        }
        *ck = det(&mk) / d;
    }
    Some((c[2], c[1], c[0]))
}
