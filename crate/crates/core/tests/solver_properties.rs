use std::f64::consts::PI;

use delaywave::diagnostics::grad_sq;
use delaywave::grid::{BoundaryKind, Edges, Grid, Grid1D, Grid2D};
use delaywave::solver::{
    cfl_dt, eigenmode_1d, polynomial_bump, run, standing_mode_2d, Dynamics, History, InitialData, RunConfig,
    Simulation, Termination,
};
use delaywave::PhysicalParams;

fn interval(nx: usize, right: BoundaryKind) -> Grid {
    Grid::Interval(Grid1D::new(1.0, nx).unwrap().with_right(right))
}

fn conservation(grid: Grid, t_end: f64) -> RunConfig {
    let mut cfg = RunConfig::new(PhysicalParams::new(0.0, 0.0, 0.0, 1.0), grid, t_end, 0.5);
    cfg.conservation = true;
    cfg
}

fn sim(grid: &Grid, p: PhysicalParams, init: &InitialData) -> Simulation {
    let (dt, n_tau) = cfl_dt(grid, 0.5, p.tau, 1 << 20).unwrap();
    Simulation::new(grid.clone(), Dynamics::interior_delay(&p), dt, n_tau, init).unwrap()
}

#[test]
fn zero_data_stays_exactly_zero() {
    let grids = [
        interval(51, BoundaryKind::Feedback),
        Grid::Rectangle(Grid2D::new(1.0, 1.0, 21, 21, Edges::LEFT_DIRICHLET).unwrap().with_origin([0.0, 0.5])),
    ];
    for grid in grids {
        let n = grid.len();
        let init = InitialData::new(vec![0.0; n], vec![0.0; n]);
        let mut s = sim(&grid, PhysicalParams::new(0.3, 1.0, 0.25, 0.6), &init);
        for _ in 0..400 {
            s.step().unwrap();
            assert!(s.state.u_curr.iter().all(|v| v.to_bits() == 0));
            assert!(s.state.history.newest().iter().all(|v| v.to_bits() == 0));
        }
    }
}

#[test]
fn eigenmode_converges_at_second_order() {
    let err = |nx: usize| {
        let grid = interval(nx, BoundaryKind::Feedback);
        let Grid::Interval(g) = &grid else { unreachable!() };
        let mut cfg = conservation(grid.clone(), 1.0);
        let n_end = (2.0 / g.dx).round() as usize;
        cfg.snapshot_every = Some(n_end);
        let out = run(&cfg, &eigenmode_1d(g, 1.0)).unwrap();
        let snap = out.snapshots.last().unwrap();
        assert_eq!(snap.t, 1.0);
        let w = grid.weights();
        g.coords()
            .iter()
            .zip(&snap.u)
            .zip(&w)
            .map(|((x, u), q)| q * (u - (PI * x / 2.0).sin() * (PI / 2.0).cos()).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let (e1, e2, e3) = (err(51), err(101), err(201));
    for order in [(e1 / e2).log2(), (e2 / e3).log2()] {
        assert!((1.8..=2.2).contains(&order), "order {order}");
    }
}

#[test]
fn solution_is_linear_in_the_data() {
    let grid = interval(201, BoundaryKind::Feedback);
    let p = PhysicalParams::new(0.05, 1.0, 0.5, 0.1);
    let base = polynomial_bump(&grid, &[0.2], &[0.6], 1.0).with_history(History::Constant);
    let alpha = -3.7;
    let mut s1 = sim(&grid, p, &base);
    let mut s2 = sim(&grid, p, &base.scaled(alpha));
    let steps = 2000;
    for _ in 0..steps {
        s1.step().unwrap();
        s2.step().unwrap();
    }
    let scale = s1.state.u_curr.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, b) in s1.state.u_curr.iter().zip(&s2.state.u_curr) {
        assert!((alpha * a - b).abs() <= 1e-12 * steps as f64 * scale * alpha.abs());
    }
    let cfg = {
        let mut c = RunConfig::new(p, grid.clone(), 1.0, 0.5);
        c.sample_every = 10;
        c
    };
    let r1 = run(&cfg, &base).unwrap();
    let r2 = run(&cfg, &base.scaled(alpha)).unwrap();
    for (a, b) in r1.samples.iter().zip(&r2.samples) {
        assert!((alpha * alpha * a.e_total - b.e_total).abs() <= 1e-10 * b.e_total.max(1e-300));
    }
}

#[test]
fn time_reversal_recovers_the_start() {
    let err = |nx: usize| {
        let grid = interval(nx, BoundaryKind::Dirichlet);
        let u0: Vec<f64> = polynomial_bump(&grid, &[0.2], &[0.7], 1.0).u0;
        let fwd = {
            let mut c = conservation(grid.clone(), 0.5);
            c.snapshot_every = Some(usize::MAX);
            run(&c, &InitialData::new(u0.clone(), vec![0.0; nx])).unwrap()
        };
        let end = fwd.snapshots.last().unwrap();
        let back_init = InitialData::new(end.u.clone(), end.v.iter().map(|v| -v).collect());
        let back = {
            let mut c = conservation(grid.clone(), 0.5);
            c.snapshot_every = Some(usize::MAX);
            run(&c, &back_init).unwrap()
        };
        let fin = &back.snapshots.last().unwrap().u;
        let w = grid.weights();
        fin.iter()
            .zip(&u0)
            .zip(&w)
            .map(|((a, b), q)| q * (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    for nx in [101, 201] {
        let dx = 1.0 / (nx - 1) as f64;
        let e = err(nx);
        assert!(e < dx * dx, "nx={nx} err={e}");
    }
}

#[test]
fn zero_history_matches_undelayed_run_for_one_delay() {
    let grid = interval(101, BoundaryKind::Feedback);
    let init = polynomial_bump(&grid, &[0.3], &[0.7], 1.0);
    let delayed = PhysicalParams::new(0.4, 1.0, 0.5, 0.8);
    let plain = PhysicalParams::new(0.0, 1.0, 0.5, 0.8);
    let mut s1 = sim(&grid, delayed, &init);
    let mut s2 = sim(&grid, plain, &init);
    let n_tau = s1.n_tau;
    // u_curr holds u^step; the delay first acts on u^{n_tau + 1}
    while s1.state.step <= n_tau {
        assert_eq!(s1.state.u_curr, s2.state.u_curr, "step {}", s1.state.step);
        s1.step().unwrap();
        s2.step().unwrap();
    }
    assert_eq!(s1.state.u_curr, s2.state.u_curr);
    s1.step().unwrap();
    s2.step().unwrap();
    assert_ne!(s1.state.u_curr, s2.state.u_curr);
}

#[test]
fn standing_mode_energy_drift_2d() {
    let g = Grid2D::new(1.0, 1.0, 101, 101, Edges::ALL_DIRICHLET).unwrap();
    let init = standing_mode_2d(&g, 1.0);
    let grid = Grid::Rectangle(g);
    let out = run(&conservation(grid, 5.0), &init).unwrap();
    let e0 = out.samples[0].e_total;
    let drift = out.samples.iter().map(|s| (s.e_total / e0 - 1.0).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-4, "{drift}");
    assert!((e0 - PI * PI / 4.0).abs() < 1e-3 * e0);
}

#[test]
fn unit_square_geometry() {
    let g = Grid2D::new(1.0, 1.0, 11, 11, Edges::LEFT_DIRICHLET).unwrap().with_origin([0.0, 0.5]);
    let (delta, m_inf) = g.check_geometry().unwrap();
    assert_eq!(delta, 0.5);
    assert!((m_inf - 1.25f64.sqrt()).abs() < 1e-15);
}

#[test]
fn boundary_feedback_only_dissipates() {
    let grid = interval(401, BoundaryKind::Feedback);
    let p = PhysicalParams::new(0.0, 1.0, 1.0, f64::EPSILON);
    let mut cfg = RunConfig::new(p, grid.clone(), 20.0, 0.5);
    cfg.sample_every = 1;
    let Grid::Interval(g) = &grid else { unreachable!() };
    let out = run(&cfg, &eigenmode_1d(g, 1.0)).unwrap();
    assert_eq!(out.status, Termination::Completed);
    let e0 = out.samples[0].e_standard;
    let tol = 10.0 * out.dt.powi(3) * e0;
    for w in out.samples.windows(2) {
        assert!(w[1].e_standard <= w[0].e_standard + tol, "t={}", w[1].t);
    }
    assert!(out.samples.last().unwrap().e_standard < 1e-3 * e0);
}

#[test]
fn snapshot_csv_layout() {
    let grid = Grid::Rectangle(Grid2D::new(1.0, 1.0, 3, 3, Edges::LEFT_DIRICHLET).unwrap().with_origin([0.0, 0.5]));
    let n = grid.len();
    let mut cfg = RunConfig::new(PhysicalParams::new(0.1, 1.0, 0.1, 0.2), grid.clone(), 0.2, 0.5);
    cfg.snapshot_every = Some(1);
    let out = run(&cfg, &InitialData::new(vec![0.0; n], vec![0.0; n])).unwrap();
    let mut buf = Vec::new();
    out.snapshots[0].write_csv(&grid, &mut buf).unwrap();
    let s = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "# t=0");
    assert_eq!(lines.len(), 1 + n);
    assert_eq!(lines[2], "0.5,0,0,0");
}

#[test]
fn gradient_energy_of_linear_profile() {
    let grid = interval(11, BoundaryKind::Feedback);
    let u: Vec<f64> = (0..11).map(|j| j as f64 / 10.0).collect();
    assert!((grad_sq(&u, &grid) - 1.0).abs() < 1e-14);
}

#[test]
fn instability_run_reports_status() {
    // a large delayed damping with no boundary dissipation grows; the
    // status is an outcome, not an error
    let grid = interval(101, BoundaryKind::Feedback);
    let mut cfg = RunConfig::new(PhysicalParams::new(5.0, 0.0, 0.3, 1.0), grid.clone(), 60.0, 0.5);
    cfg.conservation = true;
    cfg.sample_every = 50;
    let Grid::Interval(g) = &grid else { unreachable!() };
    let out = run(&cfg, &eigenmode_1d(g, 1.0)).unwrap();
    let e0 = out.samples[0].e_total;
    let emax = out.samples.iter().map(|s| s.e_total).fold(0.0, f64::max);
    assert!(matches!(out.status, Termination::BlowUp { .. } | Termination::Nan { .. }) || emax > 10.0 * e0);
}
