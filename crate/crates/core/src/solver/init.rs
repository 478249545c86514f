//! Initial-data presets.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BoundaryKind, Grid, Grid1D, Grid2D};

use super::{History, InitialData};

/// Named initial data, as used in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum InitPreset {
    /// Lowest mode of the Laplacian with the grid's boundary labels
    /// (Neumann standing in for feedback), zero velocity and history.
    Eigenmode {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude · exp(-|x - center|² / width²)`, zeroed on Γ0.
    Gaussian {
        center: Vec<f64>,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Compactly supported `((x - lo)(hi - x))^4` bump (product form in 2D).
    Polynomial {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Node values in grid order, with a constant-in-time history equal
    /// to `u1` when `constant_history` is set (zero otherwise).
    Raw {
        u0: Vec<f64>,
        u1: Vec<f64>,
        #[serde(default)]
        constant_history: bool,
    },
}

fn one() -> f64 {
    1.0
}

impl InitPreset {
    pub fn build(&self, grid: &Grid) -> Result<InitialData> {
        let data = match self {
            InitPreset::Eigenmode { amplitude } => match grid {
                Grid::Interval(g) => eigenmode_1d(g, *amplitude),
                Grid::Rectangle(g) => standing_mode_2d(g, *amplitude),
            },
            InitPreset::Gaussian {
                center,
                width,
                amplitude,
            } => {
                check_len(center, grid.dim(), "center")?;
                gaussian(grid, center, *width, *amplitude)
            }
            InitPreset::Polynomial { lo, hi, amplitude } => {
                check_len(lo, grid.dim(), "lo")?;
                check_len(hi, grid.dim(), "hi")?;
                polynomial_bump(grid, lo, hi, *amplitude)
            }
            InitPreset::Raw {
                u0,
                u1,
                constant_history,
            } => {
                let h = if *constant_history {
                    History::Constant
                } else {
                    History::Zero
                };
                InitialData::new(u0.clone(), u1.clone()).with_history(h)
            }
        };
        data.check(grid, 0).map(|_| data)
    }
}

fn check_len(v: &[f64], dim: usize, name: &str) -> Result<()> {
    if v.len() == dim {
        Ok(())
    } else {
        Err(Error::InitShape(format!("{name} needs {dim} coordinates, got {}", v.len())))
    }
}

/// `sin(πx/2L)` for a feedback (Neumann when `k = 0`) right end,
/// `sin(πx/L)` for a Dirichlet one.
pub fn eigenmode_1d(grid: &Grid1D, amplitude: f64) -> InitialData {
    let wave = match grid.right {
        BoundaryKind::Feedback => PI / (2.0 * grid.length),
        BoundaryKind::Dirichlet => PI / grid.length,
    };
    let mut u0: Vec<f64> = grid.coords().iter().map(|x| amplitude * (wave * x).sin()).collect();
    u0[0] = 0.0;
    if grid.right == BoundaryKind::Dirichlet {
        u0[grid.nx - 1] = 0.0;
    }
    InitialData::new(u0, vec![0.0; grid.nx])
}

/// Separable lowest mode: `sin(πx/Lx)` across a Dirichlet/Dirichlet pair,
/// `sin(πx/2Lx)` or its mirror across Dirichlet/feedback; likewise in `y`.
pub fn standing_mode_2d(grid: &Grid2D, amplitude: f64) -> InitialData {
    fn factor(lo: BoundaryKind, hi: BoundaryKind, len: f64) -> Box<dyn Fn(f64) -> f64> {
        use BoundaryKind::*;
        match (lo, hi) {
            (Dirichlet, Dirichlet) => Box::new(move |s| (PI * s / len).sin()),
            (Dirichlet, Feedback) => Box::new(move |s| (PI * s / (2.0 * len)).sin()),
            (Feedback, Dirichlet) => Box::new(move |s| (PI * s / (2.0 * len)).cos()),
            (Feedback, Feedback) => Box::new(|_| 1.0),
        }
    }
    let e = grid.edges;
    let fx = factor(e.left, e.right, grid.lx);
    let fy = factor(e.bottom, e.top, grid.ly);
    let mask = Grid::Rectangle(grid.clone()).dirichlet_mask();
    let mut u0 = Vec::with_capacity(grid.len());
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = grid.xy(i, j);
            u0.push(if mask[grid.idx(i, j)] { 0.0 } else { amplitude * fx(x) * fy(y) });
        }
    }
    InitialData::new(u0, vec![0.0; grid.len()])
}

pub fn gaussian(grid: &Grid, center: &[f64], width: f64, amplitude: f64) -> InitialData {
    let mask = grid.dirichlet_mask();
    let u0 = grid
        .points()
        .iter()
        .zip(mask)
        .map(|((x, y), d)| {
            if d {
                return 0.0;
            }
            let dx = x - center[0];
            let dy = if center.len() > 1 { y - center[1] } else { 0.0 };
            amplitude * (-(dx * dx + dy * dy) / (width * width)).exp()
        })
        .collect();
    InitialData::new(u0, vec![0.0; grid.len()])
}

pub fn polynomial_bump(grid: &Grid, lo: &[f64], hi: &[f64], amplitude: f64) -> InitialData {
    let bump = |s: f64, a: f64, b: f64| {
        if s <= a || s >= b {
            0.0
        } else {
            let w = 0.5 * (b - a);
            ((s - a) * (b - s) / (w * w)).powi(4)
        }
    };
    let u0 = grid
        .points()
        .iter()
        .map(|(x, y)| {
            let mut v = amplitude * bump(*x, lo[0], hi[0]);
            if lo.len() > 1 {
                v *= bump(*y, lo[1], hi[1]);
            }
            v
        })
        .collect();
    InitialData::new(u0, vec![0.0; grid.len()])
}
