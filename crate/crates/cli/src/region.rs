use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use delaywave::fmt::num;
use delaywave::region::{geometry_constants, region_report, Domain, RegionReport};
use delaywave::GeometryConstants;

use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// `(0, 1)`, Dirichlet at 0, feedback at 1, multiplier origin 0.
    IntervalUnit,
    /// Unit square, Dirichlet on the left edge, multiplier origin `(0, 1/2)`.
    SquareUnit,
}

/// Individual constants replacing the preset values.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub m_inf: Option<f64>,
    pub delta: Option<f64>,
    pub cp: Option<f64>,
    pub c0p: Option<f64>,
}

pub fn constants(preset: Preset, o: &Overrides) -> CliResult<GeometryConstants> {
    let domain = match preset {
        Preset::IntervalUnit => Domain::unit_interval(),
        Preset::SquareUnit => Domain::unit_square(),
    };
    let mut g = geometry_constants(&domain)?;
    g.n = o.n.unwrap_or(g.n);
    g.m_inf = o.m_inf.unwrap_or(g.m_inf);
    g.delta = o.delta.unwrap_or(g.delta);
    g.cp = o.cp.unwrap_or(g.cp);
    g.c0p = o.c0p.unwrap_or(g.c0p);
    g.validate()?;
    Ok(g)
}

pub fn region(k: f64, tau: f64, g: &GeometryConstants, point: Option<(f64, f64)>) -> CliResult<RegionReport> {
    Ok(region_report(k, tau, g, point)?)
}

pub fn write(report: &RegionReport, out: &Path) -> CliResult<()> {
    fs::create_dir_all(out)?;
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    fs::write(out.join("region.json"), json)?;
    let mut w = BufWriter::new(fs::File::create(out.join("polygon.csv"))?);
    writeln!(w, "# k={} tau={} a0={}", num(report.k), num(report.tau), num(report.a0))?;
    if let Some(reason) = &report.polygon.empty_reason {
        writeln!(w, "# empty: {reason}")?;
    }
    report.polygon.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}
