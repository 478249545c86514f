//! Finite-element Rayleigh-quotient oracle for the trace-Poincaré and
//! Poincaré constants.
//!
//! Both constants are the largest eigenvalue of a generalized problem
//! `A x = λ K x` over functions vanishing on Γ0, with `K` the stiffness
//! matrix and `A` either the boundary mass on Γ1 (trace constant) or the
//! domain mass (Poincaré constant). Elements are P1 on the interval and
//! bilinear Q1 on the rectangle; `K` is factored once in banded form and
//! the largest eigenvalue found by power iteration on `K⁻¹A`.

use crate::error::{Error, Result};
use crate::grid::{BoundaryKind, Edge, Edges};

/// Symmetric matrix in lower band storage.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    fn at(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (i - j)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.at(i, j)]
        }
    }

    /// Adds `v` at `(i, j)`; symmetric, so only one triangle is stored.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let p = self.at(i, j);
        self.data[p] += v;
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                let a = self.data[self.at(i, j)];
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
    }

    /// In-place Cholesky `K = L Lᵀ`; fails when `K` is not positive definite.
    pub fn cholesky(mut self) -> Result<BandCholesky> {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                let mut s = self.data[self.at(i, j)];
                let klo = lo.max(j.saturating_sub(self.bw));
                for k in klo..j {
                    s -= self.data[self.at(i, k)] * self.data[self.at(j, k)];
                }
                let p = self.at(i, j);
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::UnsupportedGeometry(
                            "stiffness matrix not positive definite".into(),
                        ));
                    }
                    self.data[p] = s.sqrt();
                } else {
                    self.data[p] = s / self.data[self.at(j, j)];
                }
            }
        }
        Ok(BandCholesky(self))
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky(BandMatrix);

impl BandCholesky {
    pub fn solve(&self, b: &mut [f64]) {
        let l = &self.0;
        for i in 0..l.n {
            let lo = i.saturating_sub(l.bw);
            let mut s = b[i];
            for k in lo..i {
                s -= l.data[l.at(i, k)] * b[k];
            }
            b[i] = s / l.data[l.at(i, i)];
        }
        for i in (0..l.n).rev() {
            let mut s = b[i];
            let hi = (i + l.bw).min(l.n - 1);
            for k in i + 1..=hi {
                s -= l.data[l.at(k, i)] * b[k];
            }
            b[i] = s / l.data[l.at(i, i)];
        }
    }
}

/// Largest `λ` with `A x = λ K x`, by power iteration on `K⁻¹ A` using the
/// Rayleigh quotient `xᵀAx / xᵀKx`.
pub fn max_generalized_eigenvalue(k: BandMatrix, a: &BandMatrix) -> Result<f64> {
    let n = k.n;
    let kmat = k.clone();
    let chol = k.cholesky()?;
    let mut x = vec![1.0; n];
    let mut ax = vec![0.0; n];
    let mut kx = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..50_000 {
        a.mul(&x, &mut ax);
        let mut y = ax.clone();
        chol.solve(&mut y);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        y.iter_mut().for_each(|v| *v /= norm);
        x = y;
        a.mul(&x, &mut ax);
        kmat.mul(&x, &mut kx);
        let num: f64 = x.iter().zip(&ax).map(|(p, q)| p * q).sum();
        let den: f64 = x.iter().zip(&kx).map(|(p, q)| p * q).sum();
        let next = num / den;
        if (next - lambda).abs() <= 1e-14 * next.abs() {
            return Ok(next);
        }
        lambda = next;
    }
    Ok(lambda)
}

/// Which constant the oracle computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quotient {
    /// `sup ∫_Γ1 φ² / ∫ |∇φ|²`.
    Trace,
    /// `sup ∫ φ² / ∫ |∇φ|²`.
    Poincare,
}

fn stiffness_1d(h: f64) -> [[f64; 2]; 2] {
    [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]]
}

fn mass_1d(h: f64) -> [[f64; 2]; 2] {
    [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]]
}

/// P1 oracle on `(0, length)`, Dirichlet at 0, Γ1 = `{length}`.
pub fn interval_oracle(length: f64, elements: usize, q: Quotient) -> Result<f64> {
    let h = length / elements as f64;
    // free nodes 1..=elements, renumbered from 0
    let n = elements;
    let mut k = BandMatrix::new(n, 1);
    let mut a = BandMatrix::new(n, 1);
    let ke = stiffness_1d(h);
    let me = mass_1d(h);
    for e in 0..elements {
        let nodes = [e, e + 1];
        for (r, &p) in nodes.iter().enumerate() {
            for (c, &s) in nodes.iter().enumerate() {
                if p == 0 || s == 0 || s > p {
                    continue;
                }
                k.add(p - 1, s - 1, ke[r][c]);
                if q == Quotient::Poincare {
                    a.add(p - 1, s - 1, me[r][c]);
                }
            }
        }
    }
    if q == Quotient::Trace {
        a.add(n - 1, n - 1, 1.0);
    }
    max_generalized_eigenvalue(k, &a)
}

/// Q1 oracle on `(0, lx) × (0, ly)` with `nx × ny` elements.
pub fn rectangle_oracle(lx: f64, ly: f64, edges: &Edges, nx: usize, ny: usize, q: Quotient) -> Result<f64> {
    let hx = lx / nx as f64;
    let hy = ly / ny as f64;
    let (px, py) = (nx + 1, ny + 1);
    let on_dirichlet = |i: usize, j: usize| {
        (i == 0 && edges.left == BoundaryKind::Dirichlet)
            || (i == nx && edges.right == BoundaryKind::Dirichlet)
            || (j == 0 && edges.bottom == BoundaryKind::Dirichlet)
            || (j == ny && edges.top == BoundaryKind::Dirichlet)
    };
    let mut number = vec![usize::MAX; px * py];
    let mut n = 0;
    for j in 0..py {
        for i in 0..px {
            if !on_dirichlet(i, j) {
                number[j * px + i] = n;
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::UnsupportedGeometry("no free nodes".into()));
    }
    if edges.all().iter().all(|(_, k)| *k == BoundaryKind::Feedback) {
        return Err(Error::UnsupportedGeometry("Γ0 must contain an edge".into()));
    }
    let bw = px + 1;
    let mut k = BandMatrix::new(n, bw);
    let mut a = BandMatrix::new(n, bw);
    let (kx, ky, mx, my) = (stiffness_1d(hx), stiffness_1d(hy), mass_1d(hx), mass_1d(hy));
    for ej in 0..ny {
        for ei in 0..nx {
            let local = [(0, 0), (1, 0), (0, 1), (1, 1)];
            for &(a1, b1) in &local {
                let p = number[(ej + b1) * px + ei + a1];
                if p == usize::MAX {
                    continue;
                }
                for &(a2, b2) in &local {
                    let s = number[(ej + b2) * px + ei + a2];
                    if s == usize::MAX || s > p {
                        continue;
                    }
                    k.add(p, s, kx[a1][a2] * my[b1][b2] + mx[a1][a2] * ky[b1][b2]);
                    if q == Quotient::Poincare {
                        a.add(p, s, mx[a1][a2] * my[b1][b2]);
                    }
                }
            }
        }
    }
    if q == Quotient::Trace {
        for (edge, kind) in edges.all() {
            if kind != BoundaryKind::Feedback {
                continue;
            }
            let (count, h, node): (usize, f64, Box<dyn Fn(usize) -> usize>) = match edge {
                Edge::Left => (ny, hy, Box::new(|s| s * px)),
                Edge::Right => (ny, hy, Box::new(|s| s * px + nx)),
                Edge::Bottom => (nx, hx, Box::new(|s| s)),
                Edge::Top => (nx, hx, Box::new(|s| ny * px + s)),
            };
            let me = mass_1d(h);
            for s in 0..count {
                let nodes = [number[node(s)], number[node(s + 1)]];
                for r in 0..2 {
                    for c in 0..2 {
                        let (p, t) = (nodes[r], nodes[c]);
                        if p == usize::MAX || t == usize::MAX || t > p {
                            continue;
                        }
                        a.add(p, t, me[r][c]);
                    }
                }
            }
        }
    }
    max_generalized_eigenvalue(k, &a)
}

/// Oracle at two resolutions, `h` and `h/2`, with Richardson extrapolation
/// `(4 λ_{h/2} - λ_h) / 3`. Errors when the two resolutions disagree by
/// more than 1%.
pub fn rectangle_richardson(lx: f64, ly: f64, edges: &Edges, n_coarse: usize, q: Quotient) -> Result<f64> {
    let ny = |n: usize| ((n as f64) * ly / lx).round().max(1.0) as usize;
    let coarse = rectangle_oracle(lx, ly, edges, n_coarse, ny(n_coarse), q)?;
    let fine = rectangle_oracle(lx, ly, edges, 2 * n_coarse, ny(2 * n_coarse), q)?;
    if (fine - coarse).abs() > 0.01 * fine.abs() {
        return Err(Error::EigenNotConverged { coarse, fine });
    }
    Ok((4.0 * fine - coarse) / 3.0)
}
