//! Explicit leapfrog integration of the delayed wave equation.
//!
//! The state after `n` steps holds `u^{n-1}` and `u^n`. The centered
//! velocity `v^{n-1} = (u^n - u^{n-2}) / 2dt` is the newest history slot,
//! so every observable (energy, functionals) refers to time `t_{n-1}`,
//! one step behind the newest displacement.

mod init;
mod one_d;
mod two_d;

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, EnergySample};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::history::HistoryBuffer;
use crate::params::{LyapunovWeights, PhysicalParams};

pub use init::{eigenmode_1d, gaussian, polynomial_bump, standing_mode_2d, InitPreset};
pub use one_d::step_1d;
pub use two_d::step_2d;

/// Any field value above this magnitude terminates the run.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

/// Default cap on `n_tau`.
pub const DEFAULT_MAX_DELAY_STEPS: usize = 200_000;

/// Terms of the linear PDE `u_tt - Δu + c u_t + r u + a u_t(t - tau) = 0`
/// with `∂u/∂ν = -k u_t` (or `-k u_t(t - tau)` when `feedback_delayed`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dynamics {
    /// `a`, coefficient of the interior delayed velocity.
    pub delay_damping: f64,
    /// `c`, coefficient of the instantaneous velocity.
    pub damping: f64,
    /// `r`, coefficient of the zeroth-order term.
    pub reaction: f64,
    /// `k`, boundary feedback gain.
    pub feedback: f64,
    pub feedback_delayed: bool,
}

impl Dynamics {
    /// Interior delay with instantaneous boundary feedback.
    pub fn interior_delay(p: &PhysicalParams) -> Self {
        Self {
            delay_damping: p.a,
            damping: 0.0,
            reaction: 0.0,
            feedback: p.k,
            feedback_delayed: false,
        }
    }
}

/// Velocity history on `(-tau, 0)`.
#[derive(Clone, Default)]
pub enum History {
    #[default]
    Zero,
    /// `g(x, s) = u1(x)` for every `s`.
    Constant,
    /// `g(x, y, s)`, with `y = 0` in 1D.
    Fn(Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>),
    /// `n_tau` fields at `s = -n_tau dt, ..., -dt`, oldest first.
    Sampled(Vec<Vec<f64>>),
}

impl std::fmt::Debug for History {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            History::Zero => f.write_str("Zero"),
            History::Constant => f.write_str("Constant"),
            History::Fn(_) => f.write_str("Fn(..)"),
            History::Sampled(v) => write!(f, "Sampled({} fields)", v.len()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InitialData {
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
    pub history: History,
}

impl InitialData {
    pub fn new(u0: Vec<f64>, u1: Vec<f64>) -> Self {
        Self {
            u0,
            u1,
            history: History::Zero,
        }
    }

    pub fn with_history(mut self, history: History) -> Self {
        self.history = history;
        self
    }

    /// Multiplies every field, including a closed-form history.
    pub fn scaled(&self, alpha: f64) -> Self {
        let history = match &self.history {
            History::Zero => History::Zero,
            History::Constant => History::Constant,
            History::Fn(g) => {
                let g = g.clone();
                History::Fn(Arc::new(move |x, y, s| alpha * g(x, y, s)))
            }
            History::Sampled(v) => History::Sampled(
                v.iter()
                    .map(|f| f.iter().map(|x| alpha * x).collect())
                    .collect(),
            ),
        };
        Self {
            u0: self.u0.iter().map(|x| alpha * x).collect(),
            u1: self.u1.iter().map(|x| alpha * x).collect(),
            history,
        }
    }

    /// Largest gap between `g(·, 0⁻)` and `u1`.
    pub fn compatibility_gap(&self, grid: &Grid) -> f64 {
        let pts = grid.points();
        match &self.history {
            History::Zero => self.u1.iter().fold(0.0, |m, v| m.max(v.abs())),
            History::Constant => 0.0,
            History::Fn(g) => pts
                .iter()
                .zip(&self.u1)
                .fold(0.0, |m, ((x, y), v)| m.max((g(*x, *y, 0.0) - v).abs())),
            History::Sampled(fields) => match fields.last() {
                Some(last) => last
                    .iter()
                    .zip(&self.u1)
                    .fold(0.0, |m, (g, v)| m.max((g - v).abs())),
                None => 0.0,
            },
        }
    }

    /// Shape checks plus `u0 = 0` on Γ0.
    pub fn check(&self, grid: &Grid, n_tau: usize) -> Result<()> {
        let n = grid.len();
        if self.u0.len() != n || self.u1.len() != n {
            return Err(Error::InitShape(format!(
                "grid has {n} nodes, u0 has {}, u1 has {}",
                self.u0.len(),
                self.u1.len()
            )));
        }
        if let History::Sampled(f) = &self.history {
            if f.len() != n_tau || f.iter().any(|v| v.len() != n) {
                return Err(Error::InitShape(format!(
                    "sampled history needs {n_tau} fields of {n} nodes"
                )));
            }
        }
        for (j, d) in grid.dirichlet_mask().iter().enumerate() {
            if *d && self.u0[j] != 0.0 {
                return Err(Error::InitShape(format!("u0 is {} on the Dirichlet node {j}", self.u0[j])));
            }
        }
        Ok(())
    }

    /// History field at lag `l` steps before t = 0 (`l` in `1..=n_tau`).
    fn history_field(&self, grid: &Grid, pts: &[(f64, f64)], l: usize, n_tau: usize, dt: f64) -> Vec<f64> {
        let mask = grid.dirichlet_mask();
        let mut f: Vec<f64> = match &self.history {
            History::Zero => vec![0.0; pts.len()],
            History::Constant => self.u1.clone(),
            History::Fn(g) => {
                let s = -(l as f64) * dt;
                pts.iter().map(|(x, y)| g(*x, *y, s)).collect()
            }
            History::Sampled(fields) => fields[n_tau - l].clone(),
        };
        for (v, d) in f.iter_mut().zip(mask) {
            if d {
                *v = 0.0;
            }
        }
        f
    }
}

/// Fields and delay buffers of a running simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    /// Time of `u_curr`.
    pub t: f64,
    /// Index of `u_curr`.
    pub step: usize,
    pub dt: f64,
    pub u_prev: Vec<f64>,
    pub u_curr: Vec<f64>,
    /// Centered velocities `v^{step-1-n_tau} ..= v^{step-1}`.
    pub history: HistoryBuffer,
    /// Boundary trace of the velocity, only for delayed feedback.
    pub boundary_history: Option<HistoryBuffer>,
}

impl SimState {
    /// Time of the observable fields (`u_prev`, newest velocity).
    pub fn observed_time(&self) -> f64 {
        (self.step - 1) as f64 * self.dt
    }

    pub fn displacement(&self) -> &[f64] {
        &self.u_prev
    }

    pub fn velocity(&self) -> &[f64] {
        self.history.newest()
    }

    /// State observed at time `n_tau·dt` with displacement `u` and the
    /// velocity window `window` (oldest first, `n_tau + 1` fields).
    /// Used to evaluate the functionals on hand-built data.
    pub fn from_window(grid: &Grid, dt: f64, u: Vec<f64>, window: &[Vec<f64>]) -> Self {
        assert!(!window.is_empty());
        let n_tau = window.len() - 1;
        let w = grid.weights();
        let mut history = HistoryBuffer::new(n_tau, grid.len());
        for f in window {
            history.push(f, weighted_sq(&w, f));
        }
        Self {
            t: (n_tau + 1) as f64 * dt,
            step: n_tau + 1,
            dt,
            u_prev: u.clone(),
            u_curr: u,
            history,
            boundary_history: None,
        }
    }
}

pub(crate) fn weighted_sq(w: &[f64], f: &[f64]) -> f64 {
    w.iter().zip(f).map(|(w, v)| w * v * v).sum()
}

/// Step outcome when a field leaves the finite range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    BlowUp { step: usize },
    Nan { step: usize },
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::BlowUp { .. } => "blow_up",
            Termination::Nan { .. } => "nan",
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::Completed => f.write_str("completed"),
            Termination::BlowUp { step } => write!(f, "blow-up detected at step {step}"),
            Termination::Nan { step } => write!(f, "non-finite value at step {step}"),
        }
    }
}

/// Scans a freshly computed field for blow-up.
pub(crate) fn scan(field: &[f64], step: usize) -> Option<Termination> {
    let mut big = false;
    for v in field {
        if !v.is_finite() {
            return Some(Termination::Nan { step });
        }
        big |= v.abs() > BLOW_UP_THRESHOLD;
    }
    big.then_some(Termination::BlowUp { step })
}

/// Largest `dt <= cfl · (grid CFL limit)` dividing `tau` into an integer
/// number of steps; returns `(dt, n_tau)`. `tau = 0` gives `n_tau = 0`.
pub fn cfl_dt(grid: &Grid, cfl: f64, tau: f64, max_delay_steps: usize) -> Result<(f64, usize)> {
    if !(cfl > 0.0 && cfl < 1.0) {
        return Err(Error::InvalidParams(vec![format!("cfl must lie in (0, 1), got {cfl}")]));
    }
    dt_for_delay(cfl * grid.cfl_limit(), tau, max_delay_steps)
}

pub(crate) fn dt_for_delay(dt_max: f64, tau: f64, max_delay_steps: usize) -> Result<(f64, usize)> {
    if tau == 0.0 {
        return Ok((dt_max, 0));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidParams(vec!["tau must be positive".into()]));
    }
    // the relative slack absorbs rounding in tau / dt_max when it is integral
    let ratio = tau / dt_max;
    let n_tau = (ratio * (1.0 - 1e-12)).ceil().max(1.0);
    if n_tau > max_delay_steps as f64 {
        return Err(Error::DelayBufferTooLarge {
            n_tau: n_tau as usize,
            max: max_delay_steps,
        });
    }
    let n_tau = n_tau as usize;
    Ok((tau / n_tau as f64, n_tau))
}

/// One simulation: grid, coefficients, step size and the evolving state.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub grid: Grid,
    pub dynamics: Dynamics,
    pub dt: f64,
    pub n_tau: usize,
    pub state: SimState,
    quad: Vec<f64>,
    next: Vec<f64>,
}

impl Simulation {
    /// Fills the history from `g`, pushes `v^0 = u1` and takes the Taylor
    /// start step `u^1 = u^0 + dt u1 + dt²/2 (Δ_h u^0 - c u1 - r u0 - a g(-tau))`.
    pub fn new(grid: Grid, dynamics: Dynamics, dt: f64, n_tau: usize, init: &InitialData) -> Result<Self> {
        init.check(&grid, n_tau)?;
        if n_tau == 0 && (dynamics.delay_damping != 0.0 || dynamics.feedback_delayed) {
            return Err(Error::InvalidParams(vec![
                "zero delay is only supported without delayed terms".into(),
            ]));
        }
        if dynamics.feedback_delayed && grid.dim() != 1 {
            return Err(Error::InvalidGrid("delayed boundary feedback is only implemented in 1D".into()));
        }
        let quad = grid.weights();
        let pts = grid.points();
        let n = grid.len();
        let mut history = HistoryBuffer::new(n_tau, n);
        let trace_nodes: Vec<usize> = grid.trace_weights().iter().map(|(j, _)| *j).collect();
        let mut boundary_history = dynamics
            .feedback_delayed
            .then(|| HistoryBuffer::new(n_tau, trace_nodes.len()));
        for l in (1..=n_tau).rev() {
            let f = init.history_field(&grid, &pts, l, n_tau, dt);
            if let Some(bh) = boundary_history.as_mut() {
                let tr: Vec<f64> = trace_nodes.iter().map(|j| f[*j]).collect();
                bh.push(&tr, 0.0);
            }
            history.push(&f, weighted_sq(&quad, &f));
        }
        history.push(&init.u1, weighted_sq(&quad, &init.u1));
        if let Some(bh) = boundary_history.as_mut() {
            let tr: Vec<f64> = trace_nodes.iter().map(|j| init.u1[*j]).collect();
            bh.push(&tr, 0.0);
        }

        let u1 = match &grid {
            Grid::Interval(g) => one_d::start(&init.u0, &init.u1, &history, boundary_history.as_ref(), &dynamics, g, dt),
            Grid::Rectangle(g) => two_d::start(&init.u0, &init.u1, &history, &dynamics, g, dt),
        };
        let state = SimState {
            t: dt,
            step: 1,
            dt,
            u_prev: init.u0.clone(),
            u_curr: u1,
            history,
            boundary_history,
        };
        Ok(Self {
            grid,
            dynamics,
            dt,
            n_tau,
            state,
            quad,
            next: vec![0.0; n],
        })
    }

    /// Advances one step; `Err` carries the termination when the new field
    /// is non-finite or above [`BLOW_UP_THRESHOLD`]. The state is left at
    /// the last finite step in that case.
    pub fn step(&mut self) -> std::result::Result<(), Termination> {
        match &self.grid {
            Grid::Interval(g) => step_1d(&self.state, &self.dynamics, g, self.dt, &mut self.next),
            Grid::Rectangle(g) => step_2d(&self.state, &self.dynamics, g, self.dt, &mut self.next),
        }
        if let Some(t) = scan(&self.next, self.state.step) {
            return Err(t);
        }
        self.commit();
        Ok(())
    }

    /// Pushes `v^n` and rotates the displacement fields.
    fn commit(&mut self) {
        let s = &mut self.state;
        let inv = 0.5 / self.dt;
        // reuse u_prev as the velocity buffer, then rotate
        for (p, nx) in s.u_prev.iter_mut().zip(&self.next) {
            *p = (nx - *p) * inv;
        }
        s.history.push(&s.u_prev, weighted_sq(&self.quad, &s.u_prev));
        if let Some(bh) = s.boundary_history.as_mut() {
            let tr: Vec<f64> = self
                .grid
                .trace_weights()
                .iter()
                .map(|(j, _)| s.u_prev[*j])
                .collect();
            bh.push(&tr, 0.0);
        }
        std::mem::swap(&mut s.u_prev, &mut s.u_curr);
        std::mem::swap(&mut s.u_curr, &mut self.next);
        s.step += 1;
        s.t = s.step as f64 * self.dt;
    }

    pub fn quadrature(&self) -> &[f64] {
        &self.quad
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub grid: Grid,
    pub t_end: f64,
    pub cfl: f64,
    pub sample_every: usize,
    pub snapshot_every: Option<usize>,
    pub weights: LyapunovWeights,
    /// Allows `k = 0` (and `tau = 0` when `a = 0`).
    pub conservation: bool,
    pub max_delay_steps: usize,
}

impl RunConfig {
    pub fn new(params: PhysicalParams, grid: Grid, t_end: f64, cfl: f64) -> Self {
        Self {
            params,
            grid,
            t_end,
            cfl,
            sample_every: 1,
            snapshot_every: None,
            weights: LyapunovWeights::ZERO,
            conservation: false,
            max_delay_steps: DEFAULT_MAX_DELAY_STEPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut v = self.params.violations(self.conservation);
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            v.push(format!("cfl must lie in (0, 1), got {}", self.cfl));
        }
        if !(self.t_end > 0.0) {
            v.push("t_end must be positive".into());
        }
        if self.sample_every == 0 {
            v.push("sample_every must be at least 1".into());
        }
        if self.snapshot_every == Some(0) {
            v.push("snapshot_every must be at least 1".into());
        }
        if !self.conservation {
            if let Err(e) = self.grid.check_geometry() {
                v.push(e.to_string());
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v))
        }
    }
}

/// Field values at one time, for CSV export.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FieldSnapshot {
    /// `# t=<time>` header, then `x,u,v` or `x,y,u,v` rows.
    pub fn write_csv<W: Write>(&self, grid: &Grid, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# t={}", crate::fmt::num(self.t))?;
        for (j, (x, y)) in grid.points().into_iter().enumerate() {
            match grid {
                Grid::Interval(_) => writeln!(w, "{}", crate::fmt::row(&[x, self.u[j], self.v[j]]))?,
                Grid::Rectangle(_) => writeln!(w, "{}", crate::fmt::row(&[x, y, self.u[j], self.v[j]]))?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dt: f64,
    pub n_tau: usize,
    pub samples: Vec<EnergySample>,
    pub snapshots: Vec<FieldSnapshot>,
    pub status: Termination,
    /// Number of observed time levels advanced.
    pub steps: usize,
}

/// Integrates to `t_end` (or blow-up), sampling the functionals every
/// `sample_every` observed steps, starting at `t = 0`.
pub fn run(config: &RunConfig, init: &InitialData) -> Result<RunOutput> {
    config.validate()?;
    let (dt, n_tau) = cfl_dt(&config.grid, config.cfl, config.params.tau, config.max_delay_steps)?;
    let dynamics = Dynamics::interior_delay(&config.params);
    let sim = Simulation::new(config.grid.clone(), dynamics, dt, n_tau, init)?;
    let mut out = drive(sim, config.t_end, config.sample_every, config.snapshot_every, |st, g| {
        diagnostics::sample(st, &config.params, g, &config.weights)
    });
    out.n_tau = n_tau;
    Ok(out)
}

/// Shared time loop; `sampler` maps the observed state to a sample.
pub(crate) fn drive(
    mut sim: Simulation,
    t_end: f64,
    sample_every: usize,
    snapshot_every: Option<usize>,
    mut sampler: impl FnMut(&SimState, &Grid) -> EnergySample,
) -> RunOutput {
    let n_end = (t_end / sim.dt).round() as usize;
    let mut samples = Vec::with_capacity(n_end / sample_every + 1);
    let mut snapshots = Vec::new();
    let mut status = Termination::Completed;
    loop {
        let observed = sim.state.step - 1;
        if observed.is_multiple_of(sample_every) || observed == n_end {
            samples.push(sampler(&sim.state, &sim.grid));
        }
        if let Some(every) = snapshot_every {
            if observed.is_multiple_of(every) || observed == n_end {
                snapshots.push(FieldSnapshot {
                    t: sim.state.observed_time(),
                    u: sim.state.displacement().to_vec(),
                    v: sim.state.velocity().to_vec(),
                });
            }
        }
        if observed >= n_end {
            break;
        }
        if let Err(t) = sim.step() {
            status = t;
            break;
        }
    }
    RunOutput {
        dt: sim.dt,
        n_tau: sim.n_tau,
        samples,
        snapshots,
        status,
        steps: sim.state.step - 1,
    }
}
