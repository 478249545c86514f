//! Geometry constants, the explicit weights and threshold `a0(k)`, the
//! feasibility predicate on `(a, xi)` and the admissible polygon.

pub mod eigen;
mod polygon;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Edges, Grid, Grid1D, Grid2D};
use crate::params::{GeometryConstants, LyapunovWeights};

pub use polygon::{region_polygon, HalfPlane, Polygon};

use eigen::Quotient;

/// Coarse element count per unit length for the rectangle oracle; the fine
/// resolution is twice this.
pub const EIGEN_COARSE: usize = 32;

/// Domains for which the constants can be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// `(0, length)`, Γ0 = {0}, Γ1 = {length}.
    Interval {
        length: f64,
        #[serde(default)]
        x0: f64,
    },
    Rectangle {
        lx: f64,
        ly: f64,
        x0: [f64; 2],
        edges: Edges,
    },
}

impl Domain {
    pub fn unit_interval() -> Self {
        Domain::Interval { length: 1.0, x0: 0.0 }
    }

    /// Unit square, Dirichlet on the left edge, multiplier origin `(0, 1/2)`.
    pub fn unit_square() -> Self {
        Domain::Rectangle {
            lx: 1.0,
            ly: 1.0,
            x0: [0.0, 0.5],
            edges: Edges::LEFT_DIRICHLET,
        }
    }

    pub fn of_grid(grid: &Grid) -> Self {
        match grid {
            Grid::Interval(g) => Domain::Interval {
                length: g.length,
                x0: g.x0,
            },
            Grid::Rectangle(g) => Domain::Rectangle {
                lx: g.lx,
                ly: g.ly,
                x0: g.x0,
                edges: g.edges,
            },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Rectangle { .. } => 2,
        }
    }

    /// `(delta, m_inf)` after checking the multiplier sign conditions.
    pub fn multiplier(&self) -> Result<(f64, f64)> {
        match *self {
            Domain::Interval { length, x0 } => Grid1D::new(length, 3)
                .map_err(|e| Error::UnsupportedGeometry(e.to_string()))?
                .with_origin(x0)
                .check_geometry(),
            Domain::Rectangle { lx, ly, x0, edges } => Grid2D::new(lx, ly, 3, 3, edges)
                .map_err(|e| Error::UnsupportedGeometry(e.to_string()))?
                .with_origin(x0)
                .check_geometry(),
        }
    }
}

/// Trace-Poincaré constant `C(P)`.
pub fn trace_constant(domain: &Domain) -> Result<f64> {
    constant(domain, Quotient::Trace)
}

/// Poincaré constant `C0(P)` for functions vanishing on Γ0.
pub fn poincare_constant(domain: &Domain) -> Result<f64> {
    constant(domain, Quotient::Poincare)
}

fn constant(domain: &Domain, q: Quotient) -> Result<f64> {
    match *domain {
        Domain::Interval { length, .. } => {
            if !(length > 0.0 && length.is_finite()) {
                return Err(Error::UnsupportedGeometry("interval length must be positive".into()));
            }
            Ok(match q {
                Quotient::Trace => length,
                Quotient::Poincare => 4.0 * length * length / (std::f64::consts::PI * std::f64::consts::PI),
            })
        }
        Domain::Rectangle { lx, ly, edges, .. } => {
            if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
                return Err(Error::UnsupportedGeometry("rectangle sides must be positive".into()));
            }
            let n = ((EIGEN_COARSE as f64) * lx).round().max(4.0) as usize;
            eigen::rectangle_richardson(lx, ly, &edges, n, q)
        }
    }
}

pub fn geometry_constants(domain: &Domain) -> Result<GeometryConstants> {
    let (delta, m_inf) = domain.multiplier()?;
    let g = GeometryConstants {
        n: domain.dim(),
        m_inf,
        delta,
        cp: trace_constant(domain)?,
        c0p: poincare_constant(domain)?,
    };
    g.validate()?;
    Ok(g)
}

/// `k / (k²(‖m‖²·2/δ + (n-1)²C(P)/2) + ‖m‖)`.
fn gain_branch(k: f64, g: &GeometryConstants) -> f64 {
    let n1 = (g.n as f64 - 1.0).powi(2);
    k / (k * k * (g.m_inf * g.m_inf * 2.0 / g.delta + 0.5 * n1 * g.cp) + g.m_inf)
}

fn check_inputs(k: f64, g: &GeometryConstants) -> Result<()> {
    let mut v = g.violations();
    if !(k > 0.0 && k.is_finite()) {
        v.push("k must be positive".into());
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidParams(v))
    }
}

/// The explicit choice of weights: `ε = 1/C(P)`, `γ2 = γ1/2` and `γ1` the
/// smallest of three closed-form bounds. Pair with `xi = 2a`.
pub fn explicit_weights(k: f64, g: &GeometryConstants) -> Result<LyapunovWeights> {
    check_inputs(k, g)?;
    let gamma1 = (1.0f64 / 3.0)
        .min(1.0 / (2.0 * g.m_inf + g.c0p + 1.0))
        .min(gain_branch(k, g));
    Ok(LyapunovWeights {
        gamma1,
        gamma2: 0.5 * gamma1,
        epsilon: 1.0 / g.cp,
    })
}

/// History weight paired with the explicit weights.
pub fn explicit_xi(a: f64) -> f64 {
    2.0 * a
}

/// Smallness threshold on `a` below which the explicit choices work.
pub fn a0(k: f64, g: &GeometryConstants) -> Result<f64> {
    check_inputs(k, g)?;
    let n1 = (g.n as f64 - 1.0).powi(2);
    Ok((1.0f64 / 9.0)
        .min(1.0 / (3.0 * (2.0 * g.m_inf + g.c0p + 1.0)))
        .min(gain_branch(k, g) / 3.0)
        .min(0.5 / (g.m_inf * g.m_inf + 0.5 * n1 * g.c0p)))
}

/// One constraint evaluated at a point: `margin = rhs - lhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub ok: bool,
    pub margin: f64,
    pub strict: bool,
}

impl Constraint {
    /// Strict constraints need `margin > strict_tol`. Non-strict ones
    /// accept `margin >= 0` up to a few ulps of `scale`, so that weights
    /// chosen to make them tight are not rejected by rounding.
    fn eval(lhs: f64, rhs: f64, strict: bool, strict_tol: f64) -> Self {
        let margin = rhs - lhs;
        let ok = if strict {
            margin > strict_tol
        } else {
            margin >= -8.0 * f64::EPSILON * lhs.abs().max(rhs.abs())
        };
        Self { ok, margin, strict }
    }
}

/// The four conditions on `(a, xi)` and the weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    /// `(a + xi)/2 < γ1 - γ2`.
    pub weight_gap: Constraint,
    /// `a(1/2 + 3γ1/2) - xi/2 <= γ2 e^{-τ}`.
    pub delay_balance: Constraint,
    /// `a(‖m‖² + (n-1)²C0/2) < 1 - εC(P)/2`.
    pub coercivity: Constraint,
    /// `γ1[k²(‖m‖²·2/δ + (n-1)²/(2ε)) + ‖m‖] <= k`; independent of `(a, xi)`.
    pub gain_gate: Constraint,
}

impl Feasibility {
    pub fn all(&self) -> bool {
        self.in_polygon() && self.gain_gate.ok
    }

    /// The three conditions that cut out the polygon.
    pub fn in_polygon(&self) -> bool {
        self.weight_gap.ok && self.delay_balance.ok && self.coercivity.ok
    }
}

pub(crate) fn half_planes(w: &LyapunovWeights, tau: f64, g: &GeometryConstants) -> [HalfPlane; 3] {
    let n1 = (g.n as f64 - 1.0).powi(2);
    [
        HalfPlane {
            ca: 0.5,
            cxi: 0.5,
            rhs: w.gamma1 - w.gamma2,
            strict: true,
        },
        HalfPlane {
            ca: 0.5 + 1.5 * w.gamma1,
            cxi: -0.5,
            rhs: w.gamma2 * (-tau).exp(),
            strict: false,
        },
        HalfPlane {
            ca: g.m_inf * g.m_inf + 0.5 * n1 * g.c0p,
            cxi: 0.0,
            rhs: 1.0 - 0.5 * w.epsilon * g.cp,
            strict: true,
        },
    ]
}

pub fn gain_gate(w: &LyapunovWeights, k: f64, g: &GeometryConstants) -> Constraint {
    let n1 = (g.n as f64 - 1.0).powi(2);
    let lhs = w.gamma1 * (k * k * (g.m_inf * g.m_inf * 2.0 / g.delta + n1 / (2.0 * w.epsilon)) + g.m_inf);
    Constraint::eval(lhs, k, false, 0.0)
}

/// Evaluates every condition at `(a, xi)`; `strict_tol` is the margin a
/// strict inequality must exceed (normally 0).
pub fn feasible(
    a: f64,
    xi: f64,
    w: &LyapunovWeights,
    tau: f64,
    k: f64,
    g: &GeometryConstants,
    strict_tol: f64,
) -> Feasibility {
    let [gap, balance, coer] = half_planes(w, tau, g).map(|h| h.eval(a, xi, strict_tol));
    Feasibility {
        weight_gap: gap,
        delay_balance: balance,
        coercivity: coer,
        gain_gate: gain_gate(w, k, g),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub a: f64,
    pub xi: f64,
    pub feasible: bool,
    pub margins: Feasibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub k: f64,
    pub tau: f64,
    pub geometry: GeometryConstants,
    pub epsilon: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub a0: f64,
    pub gain_gate: Constraint,
    pub point: Option<PointReport>,
    pub polygon: Polygon,
}

/// Explicit weights, threshold and polygon; with `point`, also the margins
/// at that `(a, xi)`.
pub fn region_report(k: f64, tau: f64, g: &GeometryConstants, point: Option<(f64, f64)>) -> Result<RegionReport> {
    let w = explicit_weights(k, g)?;
    let a0 = a0(k, g)?;
    let point = point.map(|(a, xi)| {
        let margins = feasible(a, xi, &w, tau, k, g, 0.0);
        PointReport {
            a,
            xi,
            feasible: margins.all(),
            margins,
        }
    });
    Ok(RegionReport {
        k,
        tau,
        geometry: *g,
        epsilon: w.epsilon,
        gamma1: w.gamma1,
        gamma2: w.gamma2,
        a0,
        gain_gate: gain_gate(&w, k, g),
        point,
        polygon: region_polygon(&w, tau, g),
    })
}
