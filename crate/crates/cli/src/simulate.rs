use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use delaywave::diagnostics::{check_decay_bound, equivalence_ratios, fit_decay, write_energy_csv, DecayFit};
use delaywave::fmt::num;
use delaywave::solver::{run, RunOutput, Termination};
use delaywave::verify::EQUIV_FLOOR;
use delaywave::Grid;
use serde::Serialize;

use crate::config::SimConfig;
use crate::error::CliResult;

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub c1: f64,
    pub c2: f64,
    pub holds: bool,
    pub max_violation: f64,
    pub worst_t: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub config: SimConfig,
    pub dt: f64,
    pub n_tau: usize,
    pub steps: usize,
    pub status: &'static str,
    pub termination: Termination,
    pub e0: f64,
    pub e_final: f64,
    pub fit: Option<DecayFit>,
    pub fit_error: Option<String>,
    pub bound_check: Option<BoundReport>,
    /// Extremes of `lyap / e_total` over samples above the relative floor.
    pub equivalence: Option<[f64; 2]>,
    pub equivalence_floor: f64,
}

pub struct Simulated {
    pub summary: Summary,
    pub output: RunOutput,
    pub grid: Grid,
}

pub fn simulate(cfg: &SimConfig) -> CliResult<Simulated> {
    let (resolved, run_cfg) = cfg.resolve()?;
    let init = resolved.init.build(&run_cfg.grid)?;
    let output = run(&run_cfg, &init)?;
    let e0 = output.samples.first().map_or(0.0, |s| s.e_total);
    let e_final = output.samples.last().map_or(0.0, |s| s.e_total);
    let t_start = resolved.fit.t_start.unwrap_or(resolved.params.tau);
    let (fit, fit_error) = match fit_decay(&output.samples, t_start) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let bound_check = fit.map(|f| {
        let (c1, c2) = (resolved.fit.c1_factor * f.c1, resolved.fit.c2_factor * f.c2);
        let b = check_decay_bound(&output.samples, c1, c2, 0.0);
        BoundReport {
            c1,
            c2,
            holds: b.holds,
            max_violation: b.max_violation,
            worst_t: b.worst_t,
        }
    });
    let equivalence = equivalence_ratios(&output.samples, EQUIV_FLOOR * e0).map(|(lo, hi)| [lo, hi]);
    let summary = Summary {
        dt: output.dt,
        n_tau: output.n_tau,
        steps: output.steps,
        status: output.status.label(),
        termination: output.status,
        e0,
        e_final,
        fit,
        fit_error,
        bound_check,
        equivalence,
        equivalence_floor: EQUIV_FLOOR,
        config: resolved,
    };
    Ok(Simulated {
        summary,
        output,
        grid: run_cfg.grid,
    })
}

pub fn write(sim: &Simulated, out: &Path) -> CliResult<()> {
    fs::create_dir_all(out)?;
    let p = &sim.summary.config.params;
    let mut w = BufWriter::new(fs::File::create(out.join("energy.csv"))?);
    writeln!(
        w,
        "# a={} k={} tau={} xi={}",
        num(p.a),
        num(p.k),
        num(p.tau),
        num(p.xi)
    )?;
    writeln!(
        w,
        "# dt={} n_tau={} status={}",
        num(sim.summary.dt),
        sim.summary.n_tau,
        sim.summary.status
    )?;
    write_energy_csv(&sim.output.samples, &mut w)?;
    w.flush()?;

    let mut json = serde_json::to_string_pretty(&sim.summary)?;
    json.push('\n');
    fs::write(out.join("summary.json"), json)?;

    if !sim.output.snapshots.is_empty() {
        let dir = out.join("snapshots");
        fs::create_dir_all(&dir)?;
        for (i, s) in sim.output.snapshots.iter().enumerate() {
            let mut w = BufWriter::new(fs::File::create(dir.join(format!("snapshot_{i:05}.csv")))?);
            s.write_csv(&sim.grid, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}
