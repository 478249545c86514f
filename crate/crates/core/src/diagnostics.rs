//! Energy, history functional, multiplier term and Lyapunov functional
//! evaluated on discrete states, plus the checks built on their time series.
//!
//! Every functional reads the *observed* fields of a [`SimState`]: the
//! displacement `u_prev` and the newest centered velocity. Window integrals
//! over `[t - tau, t]` use the time trapezoid over the `n_tau + 1` history
//! slots and the per-slot `∫ v²` cached at push time.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Grid1D, Grid2D};
use crate::params::{LyapunovWeights, PhysicalParams};
use crate::solver::SimState;

/// Functionals at one observed time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySample {
    pub t: f64,
    pub e_standard: f64,
    pub e_delay: f64,
    pub e_total: f64,
    pub s_func: f64,
    pub mult_term: f64,
    pub lyap: f64,
    pub boundary_diss: f64,
    /// Integrals entering the energy identity, from the same snapshot.
    #[serde(skip)]
    pub terms: IdentityTerms,
}

/// `∫ u_t(t)²`, `∫ u_t(t - tau)²`, `∫ u_t(t) u_t(t - tau)`, `∫_Γ1 u_t(t)²`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IdentityTerms {
    pub vel_sq: f64,
    pub vel_sq_delayed: f64,
    pub cross: f64,
    pub trace_sq: f64,
}

pub const ENERGY_CSV_HEADER: &str = "t,e_standard,e_delay,e_total,s_func,mult_term,lyap,boundary_diss";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParts {
    pub e_standard: f64,
    pub e_delay: f64,
    pub e_total: f64,
}

/// `∫ |∇u|²` from forward differences on grid edges.
///
/// This is the summation-by-parts partner of the three/five-point
/// Laplacian with ghost-node boundaries, so the leapfrog energy is
/// conserved up to the `O(dt²)` velocity phase error.
pub fn grad_sq(u: &[f64], grid: &Grid) -> f64 {
    match grid {
        Grid::Interval(g) => {
            let inv = 1.0 / g.dx;
            u.windows(2).map(|w| ((w[1] - w[0]) * inv).powi(2)).sum::<f64>() * g.dx
        }
        Grid::Rectangle(g) => {
            let wx = crate::grid::trapezoid_1d(g.nx, g.dx);
            let wy = crate::grid::trapezoid_1d(g.ny, g.dy);
            let mut sx = 0.0;
            let mut sy = 0.0;
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let p = g.idx(i, j);
                    if i + 1 < g.nx {
                        sx += wy[j] * ((u[p + 1] - u[p]) / g.dx).powi(2);
                    }
                    if j + 1 < g.ny {
                        sy += wx[i] * ((u[p + g.nx] - u[p]) / g.dy).powi(2);
                    }
                }
            }
            sx * g.dx + sy * g.dy
        }
    }
}

/// Time trapezoid over the window of per-slot values, weighted by
/// `weight(lag)`.
fn window_integral(state: &SimState, weight: impl Fn(usize) -> f64) -> f64 {
    let n_tau = state.history.n_tau();
    if n_tau == 0 {
        return 0.0;
    }
    let s: f64 = state
        .history
        .norms_by_lag()
        .enumerate()
        .map(|(l, v)| {
            let end = if l == 0 || l == n_tau { 0.5 } else { 1.0 };
            end * weight(l) * v
        })
        .sum();
    s * state.dt
}

pub fn energy(state: &SimState, params: &PhysicalParams, grid: &Grid) -> EnergyParts {
    let e_standard = 0.5 * (grad_sq(state.displacement(), grid) + state.history.lag_norm(0));
    let e_delay = 0.5 * params.xi * window_integral(state, |_| 1.0);
    EnergyParts {
        e_standard,
        e_delay,
        e_total: e_standard + e_delay,
    }
}

/// `S(t) = ∫_Ω ∫_{t-tau}^t e^{s-t} u_t²(x, s) ds dx`.
pub fn s_functional(state: &SimState) -> f64 {
    let dt = state.dt;
    window_integral(state, |l| (-(l as f64) * dt).exp())
}

fn gradient_1d(u: &[f64], g: &Grid1D) -> Vec<f64> {
    let n = g.nx;
    let h2 = 2.0 * g.dx;
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / h2;
    for j in 1..n - 1 {
        d[j] = (u[j + 1] - u[j - 1]) / h2;
    }
    d[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / h2;
    d
}

/// One-dimensional derivative of a strided line: centered inside,
/// one-sided second order at both ends.
fn line_derivative(get: impl Fn(usize) -> f64, n: usize, h: f64, at: usize) -> f64 {
    let h2 = 2.0 * h;
    if at == 0 {
        (-3.0 * get(0) + 4.0 * get(1) - get(2)) / h2
    } else if at == n - 1 {
        (3.0 * get(n - 1) - 4.0 * get(n - 2) + get(n - 3)) / h2
    } else {
        (get(at + 1) - get(at - 1)) / h2
    }
}

fn gradient_2d(u: &[f64], g: &Grid2D) -> (Vec<f64>, Vec<f64>) {
    let mut gx = vec![0.0; g.len()];
    let mut gy = vec![0.0; g.len()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let p = g.idx(i, j);
            gx[p] = line_derivative(|s| u[g.idx(s, j)], g.nx, g.dx, i);
            gy[p] = line_derivative(|s| u[g.idx(i, s)], g.ny, g.dy, j);
        }
    }
    (gx, gy)
}

/// `∫ (2 m·∇u + (n - 1) u) u_t` with `m = x - x0`.
pub fn multiplier_term(state: &SimState, grid: &Grid) -> f64 {
    let u = state.displacement();
    let v = state.velocity();
    let w = grid.weights();
    match grid {
        Grid::Interval(g) => {
            let d = gradient_1d(u, g);
            (0..g.nx)
                .map(|j| w[j] * 2.0 * (g.x(j) - g.x0) * d[j] * v[j])
                .sum()
        }
        Grid::Rectangle(g) => {
            let (gx, gy) = gradient_2d(u, g);
            let [x0, y0] = g.x0;
            let mut s = 0.0;
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let p = g.idx(i, j);
                    let (x, y) = g.xy(i, j);
                    let mdu = (x - x0) * gx[p] + (y - y0) * gy[p];
                    s += w[p] * (2.0 * mdu + u[p]) * v[p];
                }
            }
            s
        }
    }
}

/// `E + γ1 · multiplier_term + γ2 · S`.
pub fn lyapunov(state: &SimState, params: &PhysicalParams, grid: &Grid, weights: &LyapunovWeights) -> f64 {
    let e = energy(state, params, grid).e_total;
    if weights.gamma1 == 0.0 && weights.gamma2 == 0.0 {
        return e;
    }
    e + weights.gamma1 * multiplier_term(state, grid) + weights.gamma2 * s_functional(state)
}

fn trace_sq(v: &[f64], grid: &Grid) -> f64 {
    grid.trace_weights().iter().map(|(j, w)| w * v[*j] * v[*j]).sum()
}

/// All functionals plus the energy-identity integrals at the observed time.
pub fn sample(state: &SimState, params: &PhysicalParams, grid: &Grid, weights: &LyapunovWeights) -> EnergySample {
    let parts = energy(state, params, grid);
    let s_func = s_functional(state);
    let mult_term = multiplier_term(state, grid);
    let v = state.velocity();
    let n_tau = state.history.n_tau();
    let vd = state.history.lag(n_tau);
    let w = grid.weights();
    let cross = w.iter().zip(v).zip(vd).map(|((w, a), b)| w * a * b).sum();
    let tr = trace_sq(v, grid);
    EnergySample {
        t: state.observed_time(),
        e_standard: parts.e_standard,
        e_delay: parts.e_delay,
        e_total: parts.e_total,
        s_func,
        mult_term,
        lyap: parts.e_total + weights.gamma1 * mult_term + weights.gamma2 * s_func,
        boundary_diss: params.k * tr,
        terms: IdentityTerms {
            vel_sq: state.history.lag_norm(0),
            vel_sq_delayed: state.history.lag_norm(n_tau),
            cross,
            trace_sq: tr,
        },
    }
}

pub fn write_energy_csv<W: Write>(series: &[EnergySample], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{ENERGY_CSV_HEADER}")?;
    for s in series {
        writeln!(
            w,
            "{}",
            crate::fmt::row(&[
                s.t,
                s.e_standard,
                s.e_delay,
                s.e_total,
                s.s_func,
                s.mult_term,
                s.lyap,
                s.boundary_diss
            ])
        )?;
    }
    Ok(())
}

/// Right-hand side of the energy identity:
/// `-a ∫u_t u_t(t-τ) - k ∫_Γ1 u_t² + ξ/2 ∫u_t² - ξ/2 ∫u_t²(t-τ)`.
pub fn identity_rhs(s: &EnergySample, params: &PhysicalParams) -> f64 {
    let t = &s.terms;
    -params.a * t.cross - params.k * t.trace_sq + 0.5 * params.xi * (t.vel_sq - t.vel_sq_delayed)
}

/// `(t_n, dE/dt|_n - rhs_n)` with the centered difference of `e_total` on
/// the sampled series, for every interior sample.
pub fn energy_identity_residual(series: &[EnergySample], params: &PhysicalParams) -> Result<Vec<(f64, f64)>> {
    if series.len() < 3 {
        return Err(Error::WindowTooShort(series.len()));
    }
    Ok(series
        .windows(3)
        .map(|w| {
            let de = (w[2].e_total - w[0].e_total) / (w[2].t - w[0].t);
            (w[1].t, de - identity_rhs(&w[1], params))
        })
        .collect())
}

/// Least-squares fit of `log E(t) = log(C1 E(0)) - C2 t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c1: f64,
    pub c2: f64,
    pub r2: f64,
}

pub fn fit_decay(series: &[EnergySample], t_start: f64) -> Result<DecayFit> {
    let e0 = series.first().map(|s| s.e_total).ok_or(Error::WindowTooShort(0))?;
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|s| s.t >= t_start)
        .map(|s| (s.t, s.e_total))
        .collect();
    if pts.len() < 2 {
        return Err(Error::WindowTooShort(pts.len()));
    }
    if e0 <= 0.0 || pts.iter().any(|(_, e)| !(*e > 0.0)) {
        return Err(Error::NonPositiveEnergy);
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|(t, e)| (*t, e.ln())).collect();
    let (slope, intercept, r2) = linear_fit(&logs);
    Ok(DecayFit {
        c1: intercept.exp() / e0,
        c2: -slope,
        r2,
    })
}

/// Ordinary least squares `y = slope x + intercept`, returning `r²`
/// (1 when `y` is constant).
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    (slope, intercept, r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub holds: bool,
    /// Largest `E(t) / (C1 e^{-C2 t} E(0)) - 1`; negative when the bound
    /// holds everywhere with room.
    pub max_violation: f64,
    pub worst_t: f64,
}

/// Checks `E(t) <= C1 e^{-C2 t} E(0) (1 + tol)` at every sample.
pub fn check_decay_bound(series: &[EnergySample], c1: f64, c2: f64, tol: f64) -> BoundCheck {
    let Some(e0) = series.first().map(|s| s.e_total) else {
        return BoundCheck {
            holds: true,
            max_violation: f64::NEG_INFINITY,
            worst_t: 0.0,
        };
    };
    let mut worst = (f64::NEG_INFINITY, 0.0);
    for s in series {
        let bound = c1 * (-c2 * s.t).exp() * e0;
        let v = if bound > 0.0 {
            s.e_total / bound - 1.0
        } else if s.e_total > 0.0 {
            f64::INFINITY
        } else {
            -1.0
        };
        if v > worst.0 {
            worst = (v, s.t);
        }
    }
    BoundCheck {
        holds: worst.0 <= tol,
        max_violation: worst.0,
        worst_t: worst.1,
    }
}

/// Extremes of `lyap / e_total` over samples with `e_total > floor`.
pub fn equivalence_ratios(series: &[EnergySample], floor: f64) -> Option<(f64, f64)> {
    series
        .iter()
        .filter(|s| s.e_total > floor)
        .map(|s| s.lyap / s.e_total)
        .fold(None, |acc, r| match acc {
            None => Some((r, r)),
            Some((lo, hi)) => Some((lo.min(r), hi.max(r))),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Edges, Grid1D, Grid2D};

    fn unit_interval(nx: usize) -> Grid {
        Grid::Interval(Grid1D::new(1.0, nx).unwrap())
    }

    fn synthetic(f: impl Fn(f64) -> f64, n: usize, dt: f64) -> Vec<EnergySample> {
        (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                EnergySample {
                    t,
                    e_standard: f(t),
                    e_delay: 0.0,
                    e_total: f(t),
                    s_func: 0.0,
                    mult_term: 0.0,
                    lyap: f(t),
                    boundary_diss: 0.0,
                    terms: IdentityTerms::default(),
                }
            })
            .collect()
    }

    #[test]
    fn zero_state_has_zero_functionals() {
        let g = unit_interval(11);
        let st = SimState::from_window(&g, 0.1, vec![0.0; 11], &vec![vec![0.0; 11]; 11]);
        let p = PhysicalParams::new(0.1, 1.0, 1.0, 2.0);
        let e = energy(&st, &p, &g);
        assert_eq!((e.e_standard, e.e_delay, e.e_total), (0.0, 0.0, 0.0));
        assert_eq!(s_functional(&st), 0.0);
        assert_eq!(multiplier_term(&st, &g), 0.0);
        let w = LyapunovWeights {
            gamma1: 0.3,
            gamma2: 0.1,
            epsilon: 1.0,
        };
        assert_eq!(lyapunov(&st, &p, &g, &w), 0.0);
    }

    #[test]
    fn constant_velocity_window() {
        // u = 0, u_t = 1 on (0,1) over the whole window, xi = 2, tau = 1
        let g = unit_interval(101);
        let n_tau = 50;
        let dt = 1.0 / n_tau as f64;
        let st = SimState::from_window(&g, dt, vec![0.0; 101], &vec![vec![1.0; 101]; n_tau + 1]);
        let p = PhysicalParams::new(0.0, 1.0, 1.0, 2.0);
        let e = energy(&st, &p, &g);
        assert!((e.e_standard - 0.5).abs() < 1e-14);
        assert!((e.e_delay - 1.0).abs() < 1e-13);
        assert!((e.e_total - 1.5).abs() < 1e-13);
    }

    #[test]
    fn s_functional_constant_history() {
        // ∫_{-1}^0 e^θ dθ = 1 - 1/e, trapezoid error O(dt²)
        let g = unit_interval(11);
        let exact = 1.0 - (-1.0f64).exp();
        let mut errs = Vec::new();
        for n_tau in [50, 100] {
            let st = SimState::from_window(&g, 1.0 / n_tau as f64, vec![0.0; 11], &vec![vec![1.0; 11]; n_tau + 1]);
            let s = s_functional(&st);
            assert!((s - exact).abs() < 1e-4, "{s}");
            // weight e^{s-t} <= 1
            assert!(s <= st.history.norms_by_lag().sum::<f64>() * st.dt);
            errs.push((s - exact).abs());
        }
        assert!((errs[0] / errs[1] - 4.0).abs() < 0.05);
    }

    #[test]
    fn multiplier_of_linear_profile() {
        // u = x, u_t = 1, x0 = 0: ∫ 2x dx = 1
        let g = unit_interval(21);
        let x = match &g {
            Grid::Interval(g) => g.coords(),
            _ => unreachable!(),
        };
        let st = SimState::from_window(&g, 0.1, x, &[vec![1.0; 21], vec![1.0; 21]]);
        assert!((multiplier_term(&st, &g) - 1.0).abs() < 1e-13);
        let still = SimState::from_window(&g, 0.1, vec![1.0; 21], &[vec![0.0; 21], vec![0.0; 21]]);
        assert_eq!(multiplier_term(&still, &g), 0.0);
    }

    #[test]
    fn multiplier_2d_radial_against_dense_quadrature() {
        // u = |x - x0|² about x0 = (0, 0.5), u_t = 1 on the unit square;
        // 2 m·∇u + u = 4|m|² + |m|² = 5|m|², ∫|m|² = 1/3 + 1/12 = 5/12.
        let g2 = Grid2D::new(1.0, 1.0, 81, 81, Edges::LEFT_DIRICHLET).unwrap().with_origin([0.0, 0.5]);
        let g = Grid::Rectangle(g2.clone());
        let u: Vec<f64> = g.points().iter().map(|(x, y)| x * x + (y - 0.5).powi(2)).collect();
        let n = g.len();
        let st = SimState::from_window(&g, 0.1, u, &[vec![1.0; n], vec![1.0; n]]);
        // dense midpoint oracle, independent of the grid weights
        let m = 2000;
        let h = 1.0 / m as f64;
        let mut oracle = 0.0;
        for a in 0..m {
            for b in 0..m {
                let x = (a as f64 + 0.5) * h;
                let y = (b as f64 + 0.5) * h;
                oracle += 5.0 * (x * x + (y - 0.5).powi(2)) * h * h;
            }
        }
        assert!((oracle - 25.0 / 12.0).abs() < 1e-6);
        assert!((multiplier_term(&st, &g) - oracle).abs() < 1e-3);
    }

    #[test]
    fn degenerate_weights_give_energy() {
        let g = unit_interval(11);
        let u: Vec<f64> = (0..11).map(|j| (j as f64 * 0.1).sin()).collect();
        let st = SimState::from_window(&g, 0.1, u, &vec![vec![0.3; 11]; 5]);
        let p = PhysicalParams::new(0.1, 1.0, 0.4, 0.7);
        assert_eq!(lyapunov(&st, &p, &g, &LyapunovWeights::ZERO), energy(&st, &p, &g).e_total);
    }

    #[test]
    fn fit_recovers_synthetic_exponential() {
        let s = synthetic(|t| 3.0 * (-0.7 * t).exp(), 200, 0.05);
        let f = fit_decay(&s, 0.0).unwrap();
        assert!((f.c1 * s[0].e_total - 3.0).abs() < 1e-12);
        assert!((f.c2 - 0.7).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_nonpositive_energy() {
        let s = synthetic(|t| 1.0 - t, 30, 0.05);
        assert_eq!(fit_decay(&s, 0.0), Err(Error::NonPositiveEnergy));
    }

    #[test]
    fn bound_checks() {
        let flat = synthetic(|_| 2.0, 100, 0.1);
        assert!(check_decay_bound(&flat, 1e9, 0.0, 0.0).holds);
        let b = check_decay_bound(&flat, 1.0, 0.1, 1e-9);
        assert!(!b.holds);
        // worst at the last sample, t = 9.9
        assert!((b.max_violation - ((0.1f64 * 9.9).exp() - 1.0)).abs() < 1e-12);
        assert!((b.worst_t - 9.9).abs() < 1e-12);
        let dec = synthetic(|t| 3.0 * (-0.7 * t).exp() * (1.0 + 0.1 * (5.0 * t).sin()), 400, 0.05);
        let f = fit_decay(&dec, 0.0).unwrap();
        assert!(check_decay_bound(&dec, 1.1 * f.c1, 0.9 * f.c2, 0.0).holds);
    }

    #[test]
    fn identity_residual_needs_three_samples() {
        let p = PhysicalParams::new(0.1, 1.0, 1.0, 1.0);
        let s = synthetic(|_| 0.0, 2, 0.1);
        assert_eq!(energy_identity_residual(&s, &p), Err(Error::WindowTooShort(2)));
        let z = synthetic(|_| 0.0, 10, 0.1);
        assert!(energy_identity_residual(&z, &p).unwrap().iter().all(|(_, r)| *r == 0.0));
    }

    #[test]
    fn csv_header_and_rows() {
        let s = synthetic(|t| t + 1.0, 2, 0.5);
        let mut buf = Vec::new();
        write_energy_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], ENERGY_CSV_HEADER);
        assert_eq!(lines[2], "0.5,1.5,0,1.5,0,0,1.5,0");
    }
}
