use crate::grid::{Grid2D, NodeKind};
use crate::history::HistoryBuffer;

use super::{Dynamics, SimState};

/// Discrete Laplacian at `(i, j)` with feedback ghosts folded in.
///
/// Returns `(lap, lambda_sum)` where `lap` omits the ghost velocity term
/// and `lambda_sum = Σ 1/h` over the ghost directions, so the caller adds
/// `-2 k w · lambda_sum`. A corner shared by two feedback edges takes both
/// ghost conditions at once.
#[inline]
fn stencil(u: &[f64], g: &Grid2D, i: usize, j: usize, gx: i8, gy: i8) -> (f64, f64) {
    let c = u[g.idx(i, j)];
    let mut ghost = 0.0;
    let lx = match gx {
        0 => u[g.idx(i + 1, j)] - 2.0 * c + u[g.idx(i - 1, j)],
        1 => {
            ghost += 1.0 / g.dx;
            2.0 * (u[g.idx(i - 1, j)] - c)
        }
        _ => {
            ghost += 1.0 / g.dx;
            2.0 * (u[g.idx(i + 1, j)] - c)
        }
    };
    let ly = match gy {
        0 => u[g.idx(i, j + 1)] - 2.0 * c + u[g.idx(i, j - 1)],
        1 => {
            ghost += 1.0 / g.dy;
            2.0 * (u[g.idx(i, j - 1)] - c)
        }
        _ => {
            ghost += 1.0 / g.dy;
            2.0 * (u[g.idx(i, j + 1)] - c)
        }
    };
    (lx / (g.dx * g.dx) + ly / (g.dy * g.dy), ghost)
}

/// Five-point leapfrog update on the rectangle.
///
/// Dirichlet-edge nodes (including corners touching a Dirichlet edge) stay
/// zero; feedback-edge nodes eliminate the ghost value through
/// `∂u/∂ν = -k v` with the centered velocity, solved in closed form.
pub fn step_2d(state: &SimState, dynamics: &Dynamics, grid: &Grid2D, dt: f64, next: &mut [f64]) {
    let u = &state.u_curr;
    let up = &state.u_prev;
    let dt2 = dt * dt;
    let half_c = 0.5 * dynamics.damping * dt;
    let r = dynamics.reaction;
    let a = dynamics.delay_damping;
    let k = dynamics.feedback;
    let n_tau = state.history.n_tau();
    let delayed = (a != 0.0).then(|| state.history.lag(n_tau - 1));
    let inv_dx2 = 1.0 / (grid.dx * grid.dx);
    let inv_dy2 = 1.0 / (grid.dy * grid.dy);

    for j in 0..grid.ny {
        let interior_row = j > 0 && j < grid.ny - 1;
        for i in 0..grid.nx {
            let p = grid.idx(i, j);
            let source = |p: usize| r * u[p] + delayed.map_or(0.0, |d| a * d[p]);
            if interior_row && i > 0 && i < grid.nx - 1 {
                let lap = (u[p + 1] - 2.0 * u[p] + u[p - 1]) * inv_dx2
                    + (u[p + grid.nx] - 2.0 * u[p] + u[p - grid.nx]) * inv_dy2;
                next[p] = (2.0 * u[p] - (1.0 - half_c) * up[p] + dt2 * (lap - source(p))) / (1.0 + half_c);
                continue;
            }
            next[p] = match grid.node_kind(i, j) {
                NodeKind::Dirichlet => 0.0,
                NodeKind::Interior => unreachable!("interior nodes handled above"),
                NodeKind::Feedback { gx, gy } => {
                    let (lap, ghost) = stencil(u, grid, i, j, gx, gy);
                    let lambda = k * dt * ghost;
                    (2.0 * u[p] - (1.0 - half_c - lambda) * up[p] + dt2 * (lap - source(p)))
                        / (1.0 + half_c + lambda)
                }
            };
        }
    }
}

pub(super) fn start(
    u0: &[f64],
    u1: &[f64],
    history: &HistoryBuffer,
    dynamics: &Dynamics,
    grid: &Grid2D,
    dt: f64,
) -> Vec<f64> {
    let n_tau = history.n_tau();
    let a = dynamics.delay_damping;
    let oldest = (a != 0.0).then(|| history.lag(n_tau));
    let half_dt2 = 0.5 * dt * dt;
    let mut out = vec![0.0; grid.len()];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let p = grid.idx(i, j);
            let lap = match grid.node_kind(i, j) {
                NodeKind::Dirichlet => continue,
                NodeKind::Interior => stencil(u0, grid, i, j, 0, 0).0,
                NodeKind::Feedback { gx, gy } => {
                    let (lap, ghost) = stencil(u0, grid, i, j, gx, gy);
                    lap - 2.0 * dynamics.feedback * u1[p] * ghost
                }
            };
            let acc = lap
                - dynamics.damping * u1[p]
                - dynamics.reaction * u0[p]
                - oldest.map_or(0.0, |g| a * g[p]);
            out[p] = u0[p] + dt * u1[p] + half_dt2 * acc;
        }
    }
    out
}
