use crate::grid::{BoundaryKind, Grid1D};
use crate::history::HistoryBuffer;

use super::{Dynamics, SimState};

/// Computes `u^{n+1}` into `next` from the state holding `u^{n-1}`, `u^n`.
///
/// Interior nodes use the three-point Laplacian. At a feedback end the
/// ghost value `u_{J+1} = u_{J-1} - 2 dx k w` is substituted into the same
/// stencil; `w` is either the centered velocity at `J` (the equation stays
/// linear in `u^{n+1}_J` and is solved in closed form) or the delayed
/// boundary velocity from the boundary buffer.
pub fn step_1d(state: &SimState, dynamics: &Dynamics, grid: &Grid1D, dt: f64, next: &mut [f64]) {
    let u = &state.u_curr;
    let up = &state.u_prev;
    let n = grid.nx;
    let inv_dx2 = 1.0 / (grid.dx * grid.dx);
    let dt2 = dt * dt;
    let half_c = 0.5 * dynamics.damping * dt;
    let r = dynamics.reaction;
    let a = dynamics.delay_damping;
    let n_tau = state.history.n_tau();
    // v^{n - n_tau}: the newest slot is v^{n-1}
    let delayed = (a != 0.0).then(|| state.history.lag(n_tau - 1));
    let delay_term = |j: usize| delayed.map_or(0.0, |d| a * d[j]);

    next[0] = 0.0;
    for j in 1..n - 1 {
        let lap = (u[j + 1] - 2.0 * u[j] + u[j - 1]) * inv_dx2;
        let rhs = 2.0 * u[j] - (1.0 - half_c) * up[j] + dt2 * (lap - r * u[j] - delay_term(j));
        next[j] = rhs / (1.0 + half_c);
    }

    let jb = n - 1;
    next[jb] = match grid.right {
        BoundaryKind::Dirichlet => 0.0,
        BoundaryKind::Feedback => {
            let lap = 2.0 * (u[jb - 1] - u[jb]) * inv_dx2;
            let source = r * u[jb] + delay_term(jb);
            if dynamics.feedback_delayed {
                let bh = state
                    .boundary_history
                    .as_ref()
                    .expect("delayed feedback needs a boundary history");
                // v_J at the new time level minus tau
                let w = bh.lag(n_tau.saturating_sub(2))[0];
                (4.0 * next[jb - 1] - next[jb - 2] - 2.0 * grid.dx * dynamics.feedback * w) / 3.0
            } else {
                let lambda = dynamics.feedback * dt / grid.dx;
                (2.0 * u[jb] - (1.0 - half_c - lambda) * up[jb] + dt2 * (lap - source))
                    / (1.0 + half_c + lambda)
            }
        }
    };
}

/// Second-order Taylor start from `u0`, `u1` and the oldest history slot.
pub(super) fn start(
    u0: &[f64],
    u1: &[f64],
    history: &HistoryBuffer,
    boundary_history: Option<&HistoryBuffer>,
    dynamics: &Dynamics,
    grid: &Grid1D,
    dt: f64,
) -> Vec<f64> {
    let n = grid.nx;
    let inv_dx2 = 1.0 / (grid.dx * grid.dx);
    let n_tau = history.n_tau();
    let a = dynamics.delay_damping;
    // g(-tau) sits at lag n_tau once v^0 has been pushed
    let oldest = (a != 0.0).then(|| history.lag(n_tau));
    let accel = |j: usize, lap: f64| {
        lap - dynamics.damping * u1[j] - dynamics.reaction * u0[j] - oldest.map_or(0.0, |g| a * g[j])
    };
    let half_dt2 = 0.5 * dt * dt;
    let mut out = vec![0.0; n];
    for j in 1..n - 1 {
        let lap = (u0[j + 1] - 2.0 * u0[j] + u0[j - 1]) * inv_dx2;
        out[j] = u0[j] + dt * u1[j] + half_dt2 * accel(j, lap);
    }
    let jb = n - 1;
    if grid.right == BoundaryKind::Feedback {
        out[jb] = match boundary_history {
            Some(bh) if dynamics.feedback_delayed => {
                let w = bh.lag(n_tau - 1)[0];
                (4.0 * out[jb - 1] - out[jb - 2] - 2.0 * grid.dx * dynamics.feedback * w) / 3.0
            }
            _ => {
                let lap = 2.0 * (u0[jb - 1] - u0[jb]) * inv_dx2 - 2.0 * dynamics.feedback * u1[jb] / grid.dx;
                u0[jb] + dt * u1[jb] + half_dt2 * accel(jb, lap)
            }
        };
    }
    out
}
