use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use delaywave::fmt::num;
use delaywave::spectral::{rightmost_roots, DlpParams, SearchBox};
use delaywave::PhysicalParams;
use rayon::prelude::*;

use crate::config::{SimConfig, SweepConfig};
use crate::error::{CliError, CliResult};
use crate::simulate::simulate;

pub const HEADER: &str = "a,k,tau,xi,status,C2_fit,abscissa";

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub params: PhysicalParams,
    pub status: String,
    pub c2_fit: Option<f64>,
    pub abscissa: Option<f64>,
    /// Failure detail, written as a comment line.
    pub note: Option<String>,
}

fn point(base: &SimConfig, params: PhysicalParams, with_abscissa: bool) -> Row {
    let cfg = SimConfig {
        params,
        ..base.clone()
    };
    let mut notes = Vec::new();
    let (status, c2_fit) = match simulate(&cfg) {
        Ok(sim) => {
            if let Some(e) = &sim.summary.fit_error {
                notes.push(format!("fit: {e}"));
            }
            (sim.summary.status.to_string(), sim.summary.fit.map(|f| f.c2))
        }
        Err(e) => {
            notes.push(e.message);
            ("error".to_string(), None)
        }
    };
    let abscissa = if with_abscissa {
        let p = DlpParams::new(params.a, params.k, params.tau);
        match rightmost_roots(&p, &SearchBox::default_for(&p), None) {
            Ok(r) => r.abscissa,
            Err(e) => {
                notes.push(format!("spectrum: {e}"));
                None
            }
        }
    } else {
        None
    };
    Row {
        params,
        status,
        c2_fit,
        abscissa,
        note: (!notes.is_empty()).then(|| notes.join("; ")),
    }
}

/// Runs every point, at most `parallel` at a time (0 for one per core).
/// Rows come back in grid-index order.
pub fn sweep(cfg: &SweepConfig, parallel: usize) -> CliResult<Vec<Row>> {
    let points = cfg.points()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
        .map_err(|e| CliError::other(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        points
            .par_iter()
            .map(|p| point(&cfg.base, *p, cfg.abscissa))
            .collect()
    }))
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write(rows: &[Row], out: &Path) -> CliResult<()> {
    fs::create_dir_all(out)?;
    let mut w = BufWriter::new(fs::File::create(out.join("sweep.csv"))?);
    writeln!(w, "# {} points", rows.len())?;
    for (i, r) in rows.iter().enumerate() {
        if let Some(note) = &r.note {
            writeln!(w, "# row {i}: {}", note.replace('\n', " "))?;
        }
    }
    writeln!(w, "{HEADER}")?;
    for r in rows {
        let p = &r.params;
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            num(p.a),
            num(p.k),
            num(p.tau),
            num(p.xi),
            r.status,
            opt(r.c2_fit),
            opt(r.abscissa)
        )?;
    }
    w.flush()?;
    Ok(())
}
