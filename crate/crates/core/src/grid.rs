//! Uniform grids on the interval `(0, L)` and on the rectangle
//! `(0, Lx) × (0, Ly)`, with boundary labels and quadrature weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// `u = 0` (part of Γ0).
    Dirichlet,
    /// `∂u/∂ν = -k u_t` (part of Γ1).
    Feedback,
}

/// Interval `(0, length)`: Dirichlet at 0, `right` at `length`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub nx: usize,
    pub dx: f64,
    pub length: f64,
    pub x0: f64,
    pub right: BoundaryKind,
}

impl Grid1D {
    pub fn new(length: f64, nx: usize) -> Result<Self> {
        if nx < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {nx}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid("length must be positive".into()));
        }
        Ok(Self {
            nx,
            dx: length / (nx - 1) as f64,
            length,
            x0: 0.0,
            right: BoundaryKind::Feedback,
        })
    }

    pub fn with_right(mut self, right: BoundaryKind) -> Self {
        self.right = right;
        self
    }

    pub fn with_origin(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.nx).map(|j| self.x(j)).collect()
    }

    /// `m·ν` at the Dirichlet end (ν = -1) and at the right end (ν = +1).
    pub fn multiplier_normals(&self) -> (f64, f64) {
        (-(0.0 - self.x0), self.length - self.x0)
    }

    /// `(delta, m_inf)` when the sign conditions hold.
    pub fn check_geometry(&self) -> Result<(f64, f64)> {
        let (left, right) = self.multiplier_normals();
        if left > 0.0 {
            return Err(Error::InvalidGrid(format!("m·ν = {left} > 0 on the Dirichlet end")));
        }
        if right <= 0.0 {
            return Err(Error::InvalidGrid(format!("m·ν = {right} <= 0 on the feedback end")));
        }
        let m_inf = self.x0.abs().max((self.length - self.x0).abs());
        Ok((right, m_inf))
    }
}

/// Edge labels of a rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edges {
    pub left: BoundaryKind,
    pub right: BoundaryKind,
    pub bottom: BoundaryKind,
    pub top: BoundaryKind,
}

impl Edges {
    /// Dirichlet on the left edge, feedback on the other three.
    pub const LEFT_DIRICHLET: Self = Self {
        left: BoundaryKind::Dirichlet,
        right: BoundaryKind::Feedback,
        bottom: BoundaryKind::Feedback,
        top: BoundaryKind::Feedback,
    };

    pub const ALL_DIRICHLET: Self = Self {
        left: BoundaryKind::Dirichlet,
        right: BoundaryKind::Dirichlet,
        bottom: BoundaryKind::Dirichlet,
        top: BoundaryKind::Dirichlet,
    };

    pub fn all(&self) -> [(Edge, BoundaryKind); 4] {
        [
            (Edge::Left, self.left),
            (Edge::Right, self.right),
            (Edge::Bottom, self.bottom),
            (Edge::Top, self.top),
        ]
    }

    pub fn of(&self, edge: Edge) -> BoundaryKind {
        match edge {
            Edge::Left => self.left,
            Edge::Right => self.right,
            Edge::Bottom => self.bottom,
            Edge::Top => self.top,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

/// Role of a node in the 2D update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    Dirichlet,
    /// Outward ghost directions: `gx`, `gy` in `{-1, 0, 1}`; both nonzero
    /// at a corner shared by two feedback edges.
    Feedback { gx: i8, gy: i8 },
}

/// Rectangle `(0, lx) × (0, ly)`, nodes stored row-major: `idx = j * nx + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub lx: f64,
    pub ly: f64,
    pub x0: [f64; 2],
    pub edges: Edges,
}

impl Grid2D {
    pub fn new(lx: f64, ly: f64, nx: usize, ny: usize, edges: Edges) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3x3 nodes, got {nx}x{ny}")));
        }
        if !(lx > 0.0 && ly > 0.0) {
            return Err(Error::InvalidGrid("side lengths must be positive".into()));
        }
        if edges.all().iter().all(|(_, k)| *k == BoundaryKind::Feedback) {
            return Err(Error::InvalidGrid("at least one edge must be Dirichlet".into()));
        }
        Ok(Self {
            nx,
            ny,
            dx: lx / (nx - 1) as f64,
            dy: ly / (ny - 1) as f64,
            lx,
            ly,
            x0: [0.0, 0.5 * ly],
            edges,
        })
    }

    pub fn with_origin(mut self, x0: [f64; 2]) -> Self {
        self.x0 = x0;
        self
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn xy(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.dx, j as f64 * self.dy)
    }

    pub fn gamma0_edges(&self) -> Vec<Edge> {
        self.edges
            .all()
            .iter()
            .filter(|(_, k)| *k == BoundaryKind::Dirichlet)
            .map(|(e, _)| *e)
            .collect()
    }

    pub fn gamma1_edges(&self) -> Vec<Edge> {
        self.edges
            .all()
            .iter()
            .filter(|(_, k)| *k == BoundaryKind::Feedback)
            .map(|(e, _)| *e)
            .collect()
    }

    /// Edges the node lies on.
    fn edges_at(&self, i: usize, j: usize) -> impl Iterator<Item = Edge> {
        let on = [
            (i == 0, Edge::Left),
            (i == self.nx - 1, Edge::Right),
            (j == 0, Edge::Bottom),
            (j == self.ny - 1, Edge::Top),
        ];
        on.into_iter().filter(|(b, _)| *b).map(|(_, e)| e)
    }

    pub fn node_kind(&self, i: usize, j: usize) -> NodeKind {
        let mut gx = 0i8;
        let mut gy = 0i8;
        let mut any = false;
        for e in self.edges_at(i, j) {
            any = true;
            if self.edges.of(e) == BoundaryKind::Dirichlet {
                return NodeKind::Dirichlet;
            }
            match e {
                Edge::Left => gx = -1,
                Edge::Right => gx = 1,
                Edge::Bottom => gy = -1,
                Edge::Top => gy = 1,
            }
        }
        if any {
            NodeKind::Feedback { gx, gy }
        } else {
            NodeKind::Interior
        }
    }

    /// Corner nodes where two feedback edges meet.
    pub fn feedback_corners(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, j) in [(0, 0), (self.nx - 1, 0), (0, self.ny - 1), (self.nx - 1, self.ny - 1)] {
            if let NodeKind::Feedback { gx, gy } = self.node_kind(i, j) {
                if gx != 0 && gy != 0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// `m·ν` on an edge (constant along straight edges).
    pub fn multiplier_normal(&self, edge: Edge) -> f64 {
        let [x0, y0] = self.x0;
        match edge {
            Edge::Left => x0,
            Edge::Right => self.lx - x0,
            Edge::Bottom => y0,
            Edge::Top => self.ly - y0,
        }
    }

    /// `(delta, m_inf)` when `m·ν <= 0` on every Dirichlet edge and
    /// `m·ν > 0` on every feedback edge.
    pub fn check_geometry(&self) -> Result<(f64, f64)> {
        let mut delta = f64::INFINITY;
        for (e, kind) in self.edges.all() {
            let mn = self.multiplier_normal(e);
            match kind {
                BoundaryKind::Dirichlet if mn > 0.0 => {
                    return Err(Error::InvalidGrid(format!("m·ν = {mn} > 0 on Dirichlet edge {e:?}")))
                }
                BoundaryKind::Feedback if mn <= 0.0 => {
                    return Err(Error::InvalidGrid(format!("m·ν = {mn} <= 0 on feedback edge {e:?}")))
                }
                BoundaryKind::Feedback => delta = delta.min(mn),
                BoundaryKind::Dirichlet => {}
            }
        }
        let [x0, y0] = self.x0;
        let m_inf = [(0.0, 0.0), (self.lx, 0.0), (0.0, self.ly), (self.lx, self.ly)]
            .iter()
            .map(|(x, y)| (x - x0).hypot(y - y0))
            .fold(0.0, f64::max);
        Ok((delta, m_inf))
    }
}

/// Either supported grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grid {
    Interval(Grid1D),
    Rectangle(Grid2D),
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::Interval(g) => g.nx,
            Grid::Rectangle(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            Grid::Interval(_) => 1,
            Grid::Rectangle(_) => 2,
        }
    }

    /// Largest stable leapfrog step before the Courant factor is applied.
    pub fn cfl_limit(&self) -> f64 {
        match self {
            Grid::Interval(g) => g.dx,
            Grid::Rectangle(g) => 1.0 / (1.0 / (g.dx * g.dx) + 1.0 / (g.dy * g.dy)).sqrt(),
        }
    }

    /// Node coordinates as `(x, y)`; `y = 0` in 1D.
    pub fn points(&self) -> Vec<(f64, f64)> {
        match self {
            Grid::Interval(g) => g.coords().into_iter().map(|x| (x, 0.0)).collect(),
            Grid::Rectangle(g) => {
                let mut out = Vec::with_capacity(g.len());
                for j in 0..g.ny {
                    for i in 0..g.nx {
                        out.push(g.xy(i, j));
                    }
                }
                out
            }
        }
    }

    /// Trapezoidal quadrature weights for `∫_Ω f`.
    pub fn weights(&self) -> Vec<f64> {
        match self {
            Grid::Interval(g) => trapezoid_1d(g.nx, g.dx),
            Grid::Rectangle(g) => {
                let wx = trapezoid_1d(g.nx, g.dx);
                let wy = trapezoid_1d(g.ny, g.dy);
                let mut w = Vec::with_capacity(g.len());
                for wj in &wy {
                    for wi in &wx {
                        w.push(wi * wj);
                    }
                }
                w
            }
        }
    }

    /// Quadrature weights for `∫_Γ1 f dΓ`: the endpoint value in 1D, the
    /// edge trapezoid summed over feedback edges in 2D.
    pub fn trace_weights(&self) -> Vec<(usize, f64)> {
        match self {
            Grid::Interval(g) => match g.right {
                BoundaryKind::Feedback => vec![(g.nx - 1, 1.0)],
                BoundaryKind::Dirichlet => Vec::new(),
            },
            Grid::Rectangle(g) => {
                let mut w = vec![0.0; g.len()];
                let wx = trapezoid_1d(g.nx, g.dx);
                let wy = trapezoid_1d(g.ny, g.dy);
                for e in g.gamma1_edges() {
                    match e {
                        Edge::Left | Edge::Right => {
                            let i = if e == Edge::Left { 0 } else { g.nx - 1 };
                            for (j, wj) in wy.iter().enumerate() {
                                w[g.idx(i, j)] += wj;
                            }
                        }
                        Edge::Bottom | Edge::Top => {
                            let j = if e == Edge::Bottom { 0 } else { g.ny - 1 };
                            for (i, wi) in wx.iter().enumerate() {
                                w[g.idx(i, j)] += wi;
                            }
                        }
                    }
                }
                w.into_iter().enumerate().filter(|(_, v)| *v > 0.0).collect()
            }
        }
    }

    /// Whether the node is held at zero.
    pub fn dirichlet_mask(&self) -> Vec<bool> {
        match self {
            Grid::Interval(g) => (0..g.nx)
                .map(|j| j == 0 || (j == g.nx - 1 && g.right == BoundaryKind::Dirichlet))
                .collect(),
            Grid::Rectangle(g) => {
                let mut m = Vec::with_capacity(g.len());
                for j in 0..g.ny {
                    for i in 0..g.nx {
                        m.push(g.node_kind(i, j) == NodeKind::Dirichlet);
                    }
                }
                m
            }
        }
    }

    /// `(delta, m_inf)` of the multiplier for this grid.
    pub fn check_geometry(&self) -> Result<(f64, f64)> {
        match self {
            Grid::Interval(g) => g.check_geometry(),
            Grid::Rectangle(g) => g.check_geometry(),
        }
    }
}

pub(crate) fn trapezoid_1d(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_spacing_and_multiplier_signs() {
        let g = Grid1D::new(2.0, 201).unwrap();
        assert!((g.dx * 200.0 - 2.0).abs() < 1e-15);
        let (left, right) = g.multiplier_normals();
        assert_eq!(left, 0.0);
        assert_eq!(right, 2.0);
        assert_eq!(g.check_geometry().unwrap(), (2.0, 2.0));
        assert!(g.clone().with_origin(0.5).check_geometry().is_err());
    }

    #[test]
    fn unit_square_left_dirichlet_constants() {
        let g = Grid2D::new(1.0, 1.0, 11, 11, Edges::LEFT_DIRICHLET)
            .unwrap()
            .with_origin([0.0, 0.5]);
        let (delta, m_inf) = g.check_geometry().unwrap();
        assert_eq!(delta, 0.5);
        assert!((m_inf - 1.25f64.sqrt()).abs() < 1e-15);
        assert_eq!(g.gamma0_edges(), vec![Edge::Left]);
        assert_eq!(g.gamma1_edges().len(), 3);
        assert_eq!(g.feedback_corners(), vec![(10, 0), (10, 10)]);
    }

    #[test]
    fn every_boundary_node_has_one_role() {
        let g = Grid2D::new(1.0, 1.0, 5, 4, Edges::LEFT_DIRICHLET).unwrap();
        for j in 0..g.ny {
            for i in 0..g.nx {
                let boundary = i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1;
                let kind = g.node_kind(i, j);
                assert_eq!(boundary, kind != NodeKind::Interior);
                if i == 0 {
                    assert_eq!(kind, NodeKind::Dirichlet);
                }
            }
        }
        assert_eq!(g.node_kind(4, 3), NodeKind::Feedback { gx: 1, gy: 1 });
        assert_eq!(g.node_kind(2, 0), NodeKind::Feedback { gx: 0, gy: -1 });
    }

    #[test]
    fn weights_integrate_constants() {
        let g = Grid::Rectangle(Grid2D::new(2.0, 1.0, 9, 7, Edges::LEFT_DIRICHLET).unwrap());
        let area: f64 = g.weights().iter().sum();
        assert!((area - 2.0).abs() < 1e-14);
        let perimeter: f64 = g.trace_weights().iter().map(|(_, w)| w).sum();
        // right (1) + bottom (2) + top (2)
        assert!((perimeter - 5.0).abs() < 1e-14);
    }
}
