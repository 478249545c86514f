//! Characteristic roots of the 1D system with boundary delay
//!
//! ```text
//! u_tt - u_xx + 2a u_t + a² u = 0,   u(0, t) = 0,   u_x(1, t) = -k u_t(1, t - tau).
//! ```
//!
//! Separation of variables `u = e^{ωt} φ(x)` gives `φ'' = (ω + a)² φ`, so
//! `φ = sinh(z x)` with `z = ω + a`, and the boundary condition yields
//!
//! ```text
//! F(ω) = z cosh z + k ω e^{-ωτ} sinh z.
//! ```
//!
//! `F` vanishes at `z = 0` although `sinh(zx)` is then the zero function;
//! roots are therefore sought on `G = F / z = cosh z + k ω e^{-ωτ} sinh(z)/z`,
//! which is entire and vanishes at `ω = -a` only when `k a e^{aτ} = 1`
//! (the genuine mode `φ = x`).

use std::io::Write;

use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{fit_decay, grad_sq, EnergySample};
use crate::error::{Error, Result};
use crate::fmt::num;
use crate::grid::{Grid, Grid1D};
use crate::solver::{cfl_dt, drive, Dynamics, History, InitialData, Simulation, Termination};

/// Residual tolerance the Newton polish aims for, in scaled form.
pub const NEWTON_TOL: f64 = 1e-12;
/// Largest scaled residual a reported root may have.
pub const ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DlpParams {
    pub a: f64,
    pub k: f64,
    pub tau: f64,
}

impl DlpParams {
    pub fn new(a: f64, k: f64, tau: f64) -> Self {
        Self { a, k, tau }
    }

    /// `k = 0` is allowed so that the closed-form spectrum can be checked.
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if !(self.a > 0.0 && self.a.is_finite()) {
            v.push("a must be positive".to_string());
        }
        if !(self.k >= 0.0 && self.k.is_finite()) {
            v.push("k must be nonnegative".to_string());
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            v.push("tau must be positive".to_string());
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v))
        }
    }
}

/// Gain bound `(1 - e^{-2a}) / (1 + e^{-2a})` below which the spectrum is
/// known to lie in a left half-plane.
pub fn dlp_threshold(a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidParams(vec!["a must be positive".into()]));
    }
    let e = (-2.0 * a).exp();
    Ok((1.0 - e) / (1.0 + e))
}

/// `e^{z - m}` without forming `e^z`.
fn exp_shift(z: C, m: f64) -> C {
    C::from_polar((z.re - m).exp(), z.im)
}

/// `(cosh z, sinh z) · e^{-s}`.
fn cosh_sinh_scaled(z: C, s: f64) -> (C, C) {
    let ep = exp_shift(z, s);
    let em = exp_shift(-z, s);
    ((ep + em) * 0.5, (ep - em) * 0.5)
}

/// `sinh(z)/z · e^{-s}` and its derivative in `z`, series near 0.
fn shc_scaled(z: C, s: f64, sinh_s: C, cosh_s: C) -> (C, C) {
    if z.norm() < 1e-3 {
        let f = (-s).exp();
        let z2 = z * z;
        (
            (C::new(1.0, 0.0) + z2 / 6.0 + z2 * z2 / 120.0) * f,
            (z / 3.0 + z * z2 / 30.0) * f,
        )
    } else {
        (sinh_s / z, (z * cosh_s - sinh_s) / (z * z))
    }
}

/// `F(ω) e^{-m(ω)}` with `m = |Re z| + max(0, -τ Re ω)`; the scaled
/// function is bounded by a polynomial in `|ω|` across the plane.
pub fn char_fn_scaled(w: C, p: &DlpParams) -> C {
    let z = w + p.a;
    let sz = (w.re + p.a).abs();
    let sd = (-p.tau * w.re).max(0.0);
    let (ch, _) = cosh_sinh_scaled(z, sz + sd);
    let (_, sh) = cosh_sinh_scaled(z, sz);
    let delay = exp_shift(-w * p.tau, sd);
    z * ch + p.k * w * delay * sh
}

/// `F(ω)` unscaled; overflows for large `|Re ω|`.
pub fn char_fn(w: C, p: &DlpParams) -> C {
    let z = w + p.a;
    z * z.cosh() + p.k * w * (-w * p.tau).exp() * z.sinh()
}

/// `(G, G')` at `ω`, both times `e^{-m(ω)}`.
pub fn reduced_scaled(w: C, p: &DlpParams) -> (C, C) {
    let z = w + p.a;
    let sz = (w.re + p.a).abs();
    let sd = (-p.tau * w.re).max(0.0);
    let (ch, sh) = cosh_sinh_scaled(z, sz);
    let (shc, dshc) = shc_scaled(z, sz, sh, ch);
    let (ch_m, sh_m) = cosh_sinh_scaled(z, sz + sd);
    let delay = exp_shift(-w * p.tau, sd);
    let g = ch_m + p.k * w * delay * shc;
    let dg = sh_m + p.k * delay * ((1.0 - p.tau * w) * shc + w * dshc);
    (g, dg)
}

/// Scan rectangle `[re_min, re_max] × [0, im_max]` and its grid size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl SearchBox {
    /// `Re ∈ [-3a - 1, 0.5]`, `Im ∈ [0, 20/τ + 10]`, 400 × 400.
    pub fn default_for(p: &DlpParams) -> Self {
        Self {
            re_min: -3.0 * p.a - 1.0,
            re_max: 0.5,
            im_max: 20.0 / p.tau + 10.0,
            n_re: 400,
            n_im: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub re: f64,
    pub im: f64,
    /// `|F(ω)| e^{-m(ω)}`.
    pub residual: f64,
}

impl Root {
    pub fn omega(&self) -> C {
        C::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub params: DlpParams,
    /// Sorted by descending real part, then ascending imaginary part.
    pub roots: Vec<Root>,
    pub abscissa: Option<f64>,
    /// `-abscissa` when the abscissa is negative.
    pub beta: Option<f64>,
    pub search_box: SearchBox,
    /// Zero count of `G` inside the box mirrored across the real axis.
    pub winding: i64,
    pub found: usize,
    /// The contour actually used after moving edges off nearby roots.
    pub contour: [f64; 3],
}

impl SpectralResult {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "re,im,residual")?;
        for r in &self.roots {
            writeln!(w, "{},{},{}", num(r.re), num(r.im), num(r.residual))?;
        }
        Ok(())
    }
}

fn newton(mut w: C, p: &DlpParams) -> Option<C> {
    for _ in 0..60 {
        let (g, dg) = reduced_scaled(w, p);
        if dg.norm() == 0.0 || !dg.is_finite() {
            return None;
        }
        let step = g / dg;
        w -= step;
        if !w.is_finite() {
            return None;
        }
        if step.norm() <= 1e-15 * w.norm().max(1.0) {
            break;
        }
    }
    let res = char_fn_scaled(w, p).norm();
    (res <= ROOT_TOL).then_some(w)
}

/// Zeros of `G` enclosed by `[re_min, re_max] × [-im_max, im_max]`, from
/// the total change of `arg G` along the boundary with steps refined until
/// every increment is below `π/8`.
pub fn winding_count(p: &DlpParams, re_min: f64, re_max: f64, im_max: f64) -> Result<i64> {
    let corners = [
        C::new(re_min, -im_max),
        C::new(re_max, -im_max),
        C::new(re_max, im_max),
        C::new(re_min, im_max),
    ];
    let g = |w: C| reduced_scaled(w, p).0;
    let mut total = 0.0;
    for e in 0..4 {
        let (from, to) = (corners[e], corners[(e + 1) % 4]);
        let len = (to - from).norm();
        let mut s = 0.0;
        let mut h = len / 256.0;
        let mut prev = g(from);
        while s < len {
            let hs = h.min(len - s);
            let next = g(from + (to - from) * ((s + hs) / len));
            if next.norm() == 0.0 {
                return Err(Error::IncompleteRootCapture { winding: -1, found: 0 });
            }
            let d = (next / prev).arg();
            if d.abs() > std::f64::consts::PI / 8.0 && hs > 1e-12 * len {
                h = hs * 0.5;
                continue;
            }
            total += d;
            prev = next;
            s += hs;
            h = (hs * 2.0).min(len / 64.0);
        }
    }
    Ok((total / std::f64::consts::TAU).round() as i64)
}

fn local_minima(p: &DlpParams, b: &SearchBox) -> Vec<C> {
    let (nr, ni) = (b.n_re, b.n_im);
    let hr = (b.re_max - b.re_min) / (nr - 1) as f64;
    let hi = b.im_max / (ni - 1) as f64;
    let at = |i: usize, j: usize| C::new(b.re_min + i as f64 * hr, j as f64 * hi);
    // |G| varies smoothly once the exponential scale is removed
    let vals: Vec<f64> = (0..ni)
        .into_par_iter()
        .flat_map_iter(|j| (0..nr).map(move |i| (i, j)))
        .map(|(i, j)| reduced_scaled(at(i, j), p).0.norm())
        .collect();
    let v = |i: usize, j: usize| vals[j * nr + i];
    let mut out = Vec::new();
    for j in 0..ni {
        for i in 0..nr {
            let c = v(i, j);
            let mut is_min = true;
            'n: for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    // mirror across the real axis
                    let jj = jj.abs();
                    if ii < 0 || ii >= nr as i64 || jj >= ni as i64 {
                        continue;
                    }
                    if v(ii as usize, jj as usize) < c {
                        is_min = false;
                        break 'n;
                    }
                }
            }
            if is_min {
                out.push(at(i, j));
            }
        }
    }
    out
}

fn same(a: C, b: C) -> bool {
    (a - b).norm() <= 1e-8 * a.norm().max(1.0)
}

/// Rightmost roots inside the box, closed under conjugation, with the
/// argument-principle count over the mirrored box as a completeness check.
/// `max_roots` truncates the reported list (after the check).
pub fn rightmost_roots(p: &DlpParams, b: &SearchBox, max_roots: Option<usize>) -> Result<SpectralResult> {
    p.validate()?;
    if !(b.re_min < b.re_max && b.im_max > 0.0 && b.n_re >= 3 && b.n_im >= 3) {
        return Err(Error::InvalidParams(vec!["degenerate search box".into()]));
    }
    let seeds = local_minima(p, b);
    let polished: Vec<C> = seeds.par_iter().filter_map(|s| newton(*s, p)).collect();
    let mut upper: Vec<C> = Vec::new();
    for mut w in polished {
        if w.im.abs() <= 1e-9 * w.norm().max(1.0) {
            if let Some(r) = newton(C::new(w.re, 0.0), p).filter(|r| r.im.abs() < 1e-9) {
                w = C::new(r.re, 0.0);
            }
        }
        let w = if w.im < 0.0 { w.conj() } else { w };
        if !upper.iter().any(|u| same(*u, w)) {
            upper.push(w);
        }
    }
    let mut all: Vec<C> = Vec::new();
    for w in &upper {
        all.push(*w);
        if w.im != 0.0 {
            all.push(w.conj());
        }
    }

    // keep the contour away from roots sitting on it
    let (span_re, span_im) = (b.re_max - b.re_min, b.im_max);
    let (mut lo, mut hi, mut top) = (b.re_min, b.re_max, b.im_max);
    let near = 1e-6 * span_re.max(span_im);
    for _ in 0..8 {
        let mut moved = false;
        for w in &all {
            if (w.re - lo).abs() < near {
                lo += 1e-3 * span_re;
                moved = true;
            }
            if (w.re - hi).abs() < near {
                hi -= 1e-3 * span_re;
                moved = true;
            }
            if (w.im.abs() - top).abs() < near {
                top -= 1e-3 * span_im;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    let inside = |w: &C| w.re > lo && w.re < hi && w.im.abs() < top;
    let mut roots: Vec<Root> = all
        .iter()
        .filter(|w| inside(w))
        .map(|w| Root {
            re: w.re,
            im: w.im,
            residual: char_fn_scaled(*w, p).norm(),
        })
        .collect();
    roots.sort_by(|x, y| y.re.total_cmp(&x.re).then(x.im.total_cmp(&y.im)));
    let found = roots.len();
    let winding = winding_count(p, lo, hi, top)?;
    if winding != found as i64 {
        return Err(Error::IncompleteRootCapture { winding, found });
    }
    let abscissa = roots.first().map(|r| r.re);
    if let Some(m) = max_roots {
        roots.truncate(m);
    }
    Ok(SpectralResult {
        params: *p,
        roots,
        abscissa,
        beta: abscissa.filter(|a| *a < 0.0).map(|a| -a),
        search_box: *b,
        winding,
        found,
        contour: [lo, hi, top],
    })
}

/// `½ ∫ (u_x² + u_t² + a² u²)`.
fn dlp_energy(u: &[f64], v: &[f64], a: f64, grid: &Grid) -> f64 {
    let w = grid.weights();
    let l2 = |f: &[f64]| f.iter().zip(&w).map(|(x, q)| q * x * x).sum::<f64>();
    0.5 * (grad_sq(u, grid) + l2(v) + a * a * l2(u))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    /// Root used for the modal initial data.
    pub root: Root,
    /// `-Re ω` of that root.
    pub spectral_rate: f64,
    /// Half the fitted energy decay rate.
    pub fitted_rate: f64,
    pub gap: f64,
    pub r2: f64,
    pub dt: f64,
    pub n_tau: usize,
}

/// Simulates the system from the mode `Re(e^{ωt} sinh(z x))` of the
/// rightmost root and compares the amplitude decay rate from the fitted
/// energy slope with `-Re ω`.
pub fn crossvalidate_decay(p: &DlpParams, nx: usize, t_end: f64, cfl: f64) -> Result<CrossValidation> {
    let spectrum = rightmost_roots(p, &SearchBox::default_for(p), None)?;
    let root = *spectrum
        .roots
        .iter()
        .find(|r| r.im >= 0.0)
        .ok_or_else(|| Error::CrossValidation("no root in the search box".into()))?;
    if root.re >= 0.0 {
        return Err(Error::CrossValidation(format!("abscissa {} is not negative", root.re)));
    }
    let w = root.omega();
    let z = w + p.a;
    let grid = Grid::Interval(Grid1D::new(1.0, nx)?);
    let (dt, n_tau) = cfl_dt(&grid, cfl, p.tau, usize::MAX)?;
    let xs = match &grid {
        Grid::Interval(g) => g.coords(),
        Grid::Rectangle(_) => unreachable!(),
    };
    let mode = move |x: f64, s: f64| (w * s).exp() * (z * x).sinh();
    let u0: Vec<f64> = xs.iter().map(|x| mode(*x, 0.0).re).collect();
    let u1: Vec<f64> = xs.iter().map(|x| (w * mode(*x, 0.0)).re).collect();
    let history = History::Fn(std::sync::Arc::new(move |x, _y, s| (w * mode(x, s)).re));
    let init = InitialData::new(u0, u1).with_history(history);
    let dynamics = Dynamics {
        delay_damping: 0.0,
        damping: 2.0 * p.a,
        reaction: p.a * p.a,
        feedback: p.k,
        feedback_delayed: true,
    };
    let sim = Simulation::new(grid, dynamics, dt, n_tau, &init)?;
    let every = ((0.01 / dt).round() as usize).max(1);
    let a = p.a;
    let out = drive(sim, t_end, every, None, |st, g| {
        let e = dlp_energy(st.displacement(), st.velocity(), a, g);
        EnergySample {
            t: st.observed_time(),
            e_standard: e,
            e_delay: 0.0,
            e_total: e,
            s_func: 0.0,
            mult_term: 0.0,
            lyap: e,
            boundary_diss: 0.0,
            terms: Default::default(),
        }
    });
    if out.status != Termination::Completed {
        return Err(Error::CrossValidation(format!("time-domain run ended with {}", out.status)));
    }
    let fit = fit_decay(&out.samples, p.tau)?;
    let spectral_rate = -root.re;
    let fitted_rate = 0.5 * fit.c2;
    Ok(CrossValidation {
        root,
        spectral_rate,
        fitted_rate,
        gap: (fitted_rate - spectral_rate).abs() / spectral_rate,
        r2: fit.r2,
        dt,
        n_tau,
    })
}
