use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::fmt::num;
use crate::params::{GeometryConstants, LyapunovWeights};

use super::{half_planes, Constraint};

/// `ca·a + cxi·xi <= rhs` (or `<` when `strict`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub ca: f64,
    pub cxi: f64,
    pub rhs: f64,
    pub strict: bool,
}

impl HalfPlane {
    pub fn margin(&self, a: f64, xi: f64) -> f64 {
        self.rhs - (self.ca * a + self.cxi * xi)
    }

    pub(crate) fn eval(&self, a: f64, xi: f64, strict_tol: f64) -> Constraint {
        Constraint::eval(self.ca * a + self.cxi * xi, self.rhs, self.strict, strict_tol)
    }

    /// Where the boundary line crosses `xi = 0`.
    pub fn a_intercept(&self) -> Option<f64> {
        (self.ca != 0.0).then(|| self.rhs / self.ca)
    }

    /// Where the boundary line crosses `a = 0`.
    pub fn xi_intercept(&self) -> Option<f64> {
        (self.cxi != 0.0).then(|| self.rhs / self.cxi)
    }

    /// Euclidean distance from `(a, xi)` to the boundary line.
    pub fn distance(&self, a: f64, xi: f64) -> f64 {
        self.margin(a, xi).abs() / self.ca.hypot(self.cxi)
    }
}

/// Convex polygon in the `(a, xi)` plane, counterclockwise; empty with a
/// reason when the constraints leave no interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<[f64; 2]>,
    pub empty_reason: Option<String>,
    pub constraints: Vec<HalfPlane>,
}

impl Polygon {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Closed membership test.
    pub fn contains(&self, a: f64, xi: f64) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        (0..n).all(|i| {
            let [x1, y1] = self.vertices[i];
            let [x2, y2] = self.vertices[(i + 1) % n];
            (x2 - x1) * (xi - y1) - (y2 - y1) * (a - x1) >= 0.0
        })
    }

    pub fn area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "a,xi")?;
        for [a, xi] in &self.vertices {
            writeln!(w, "{},{}", num(*a), num(*xi))?;
        }
        Ok(())
    }
}

fn shoelace(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let [x1, y1] = v[i];
            let [x2, y2] = v[(i + 1) % n];
            x1 * y2 - x2 * y1
        })
        .sum::<f64>()
        * 0.5
}

fn clip(poly: &[[f64; 2]], h: &HalfPlane) -> Vec<[f64; 2]> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let (mp, mq) = (h.margin(p[0], p[1]), h.margin(q[0], q[1]));
        if mp >= 0.0 {
            out.push(p);
        }
        if (mp >= 0.0) != (mq >= 0.0) {
            let t = mp / (mp - mq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Intersection of `a >= 0`, `xi >= 0` and the three `(a, xi)` conditions
/// at fixed weights. The gain condition does not depend on `(a, xi)` and
/// is reported separately.
pub fn region_polygon(w: &LyapunovWeights, tau: f64, g: &GeometryConstants) -> Polygon {
    let constraints = half_planes(w, tau, g).to_vec();
    let empty = |reason: &str| Polygon {
        vertices: Vec::new(),
        empty_reason: Some(reason.to_string()),
        constraints: constraints.clone(),
    };
    let side = 2.0 * (w.gamma1 - w.gamma2);
    if !(side > 0.0) {
        return empty("gamma1 <= gamma2: no admissible a > 0");
    }
    // the weight-gap condition already confines a, xi >= 0 to this square
    let mut poly = vec![[0.0, 0.0], [side, 0.0], [side, side], [0.0, side]];
    for h in &constraints {
        poly = clip(&poly, h);
        if poly.is_empty() {
            return empty("constraints have empty intersection");
        }
    }
    let tol = 1e-14 * side;
    let mut v: Vec<[f64; 2]> = Vec::with_capacity(poly.len());
    for p in poly {
        if v.last().is_none_or(|q| (p[0] - q[0]).abs() > tol || (p[1] - q[1]).abs() > tol) {
            v.push(p);
        }
    }
    while v.len() > 1 {
        let (f, l) = (v[0], v[v.len() - 1]);
        if (f[0] - l[0]).abs() <= tol && (f[1] - l[1]).abs() <= tol {
            v.pop();
        } else {
            break;
        }
    }
    if v.len() < 3 || shoelace(&v) <= tol * tol {
        return empty("constraints leave no interior");
    }
    Polygon {
        vertices: v,
        empty_reason: None,
        constraints,
    }
}
