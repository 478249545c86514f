//! JSON run configurations.

use std::path::Path;

use delaywave::grid::Edges;
use delaywave::region::{geometry_constants, explicit_weights, Domain};
use delaywave::solver::{InitPreset, RunConfig};
use delaywave::{BoundaryKind, Grid, Grid1D, Grid2D, LyapunovWeights, PhysicalParams};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    /// Dirichlet at 0, `right` at `length`.
    Interval {
        #[serde(default = "one")]
        length: f64,
        nx: usize,
        #[serde(default = "feedback")]
        right: BoundaryKind,
        #[serde(default)]
        x0: f64,
    },
    Rectangle {
        #[serde(default = "one")]
        lx: f64,
        #[serde(default = "one")]
        ly: f64,
        nx: usize,
        ny: usize,
        #[serde(default = "left_dirichlet")]
        edges: Edges,
        /// Multiplier origin, `(0, ly/2)` when absent.
        #[serde(default)]
        x0: Option<[f64; 2]>,
    },
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn feedback() -> BoundaryKind {
    BoundaryKind::Feedback
}

fn left_dirichlet() -> Edges {
    Edges::LEFT_DIRICHLET
}

fn one_usize() -> usize {
    1
}

impl GridSpec {
    pub fn build(&self) -> CliResult<Grid> {
        Ok(match *self {
            GridSpec::Interval { length, nx, right, x0 } => {
                Grid::Interval(Grid1D::new(length, nx)?.with_right(right).with_origin(x0))
            }
            GridSpec::Rectangle {
                lx,
                ly,
                nx,
                ny,
                edges,
                x0,
            } => Grid::Rectangle(Grid2D::new(lx, ly, nx, ny, edges)?.with_origin(x0.unwrap_or([0.0, 0.5 * ly]))),
        })
    }

    fn resolved(&self) -> Self {
        match self {
            GridSpec::Rectangle {
                lx,
                ly,
                nx,
                ny,
                edges,
                x0,
            } => GridSpec::Rectangle {
                lx: *lx,
                ly: *ly,
                nx: *nx,
                ny: *ny,
                edges: *edges,
                x0: Some(x0.unwrap_or([0.0, 0.5 * ly])),
            },
            g => g.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    #[serde(default = "one_usize")]
    pub sample_every: usize,
    #[serde(default)]
    pub snapshot_every: Option<usize>,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            sample_every: 1,
            snapshot_every: None,
        }
    }
}

/// Decay fit window and the envelope tested against the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    /// Start of the fit window, `tau` when absent.
    #[serde(default)]
    pub t_start: Option<f64>,
    /// Envelope `C1 = c1_factor · C1_fit`, `C2 = c2_factor · C2_fit`.
    #[serde(default = "default_c1_factor")]
    pub c1_factor: f64,
    #[serde(default = "one")]
    pub c2_factor: f64,
}

fn default_c1_factor() -> f64 {
    1.2
}

impl Default for FitSpec {
    fn default() -> Self {
        Self {
            t_start: None,
            c1_factor: default_c1_factor(),
            c2_factor: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub params: PhysicalParams,
    pub grid: GridSpec,
    pub init: InitPreset,
    pub t_end: f64,
    #[serde(default = "half")]
    pub cfl: f64,
    #[serde(default)]
    pub sampling: Sampling,
    /// Allows `k = 0`, and `tau = 0` when `a = 0`.
    #[serde(default)]
    pub conservation: bool,
    /// Lyapunov weights; the explicit choices for the domain when absent,
    /// zero when those do not exist.
    #[serde(default)]
    pub weights: Option<LyapunovWeights>,
    #[serde(default)]
    pub fit: FitSpec,
}

impl SimConfig {
    /// Fills every defaulted field so the result re-runs identically.
    pub fn resolve(&self) -> CliResult<(SimConfig, RunConfig)> {
        let grid = self.grid.build()?;
        let weights = match self.weights {
            Some(w) => w,
            None => default_weights(self.params.k, &grid),
        };
        let fit = FitSpec {
            t_start: Some(self.fit.t_start.unwrap_or(self.params.tau)),
            ..self.fit
        };
        let resolved = SimConfig {
            grid: self.grid.resolved(),
            weights: Some(weights),
            fit,
            ..self.clone()
        };
        let mut run = RunConfig::new(self.params, grid, self.t_end, self.cfl);
        run.sample_every = self.sampling.sample_every;
        run.snapshot_every = self.sampling.snapshot_every;
        run.weights = weights;
        run.conservation = self.conservation;
        run.validate()?;
        Ok((resolved, run))
    }
}

fn default_weights(k: f64, grid: &Grid) -> LyapunovWeights {
    if k.is_nan() || k <= 0.0 {
        return LyapunovWeights::ZERO;
    }
    geometry_constants(&Domain::of_grid(grid))
        .and_then(|g| explicit_weights(k, &g))
        .unwrap_or(LyapunovWeights::ZERO)
}

/// Values along each swept parameter; absent axes keep the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axes {
    #[serde(default)]
    pub a: Option<Vec<f64>>,
    #[serde(default)]
    pub k: Option<Vec<f64>>,
    #[serde(default)]
    pub tau: Option<Vec<f64>>,
    #[serde(default)]
    pub xi: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: SimConfig,
    pub axes: Axes,
    /// Sets `xi = 2a` at every point; excludes an `xi` axis.
    #[serde(default)]
    pub xi_from_a: bool,
    /// Adds the spectral abscissa of the 1D boundary-delay system.
    #[serde(default)]
    pub abscissa: bool,
}

impl SweepConfig {
    /// Points in grid-index order, `a` slowest and `xi` fastest.
    pub fn points(&self) -> CliResult<Vec<PhysicalParams>> {
        if self.xi_from_a && self.axes.xi.is_some() {
            return Err(CliError::config("axes.xi: cannot be combined with xi_from_a"));
        }
        let base = self.base.params;
        let axis = |v: &Option<Vec<f64>>, name: &str, dflt: f64| -> CliResult<Vec<f64>> {
            match v {
                Some(v) if v.is_empty() => Err(CliError::config(format!("axes.{name}: empty axis"))),
                Some(v) => Ok(v.clone()),
                None => Ok(vec![dflt]),
            }
        };
        let (aa, kk, tt, xx) = (
            axis(&self.axes.a, "a", base.a)?,
            axis(&self.axes.k, "k", base.k)?,
            axis(&self.axes.tau, "tau", base.tau)?,
            axis(&self.axes.xi, "xi", base.xi)?,
        );
        let mut out = Vec::with_capacity(aa.len() * kk.len() * tt.len() * xx.len());
        for &a in &aa {
            for &k in &kk {
                for &tau in &tt {
                    for &xi in &xx {
                        let xi = if self.xi_from_a { 2.0 * a } else { xi };
                        out.push(PhysicalParams::new(a, k, tau, xi));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Parses a JSON file, reporting the path of the offending field.
pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::config(format!("config: {inner}"))
        } else {
            CliError::config(format!("config field `{path}`: {inner}"))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "params": {"a": 0.05, "k": 1, "tau": 1, "xi": 0.1},
        "grid": {"kind": "interval", "nx": 101},
        "init": {"preset": "eigenmode"},
        "t_end": 2
    }"#;

    #[test]
    fn defaults_resolve() {
        let c: SimConfig = parse(MINIMAL).unwrap();
        let (r, run) = c.resolve().unwrap();
        assert_eq!(r.cfl, 0.5);
        assert_eq!(r.fit.t_start, Some(1.0));
        assert!(r.weights.unwrap().gamma1 > 0.0);
        assert_eq!(run.sample_every, 1);
        let again: SimConfig = parse(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn missing_field_reports_path() {
        let text = MINIMAL.replace(r#", "tau": 1"#, "");
        let e = parse::<SimConfig>(&text).unwrap_err();
        assert_eq!(e.code, 2);
        assert!(e.message.contains("params"), "{}", e.message);
        assert!(e.message.contains("tau"), "{}", e.message);
    }

    #[test]
    fn unknown_field_rejected() {
        let text = MINIMAL.replace(r#""t_end": 2"#, r#""t_end": 2, "tend": 3"#);
        let e = parse::<SimConfig>(&text).unwrap_err();
        assert!(e.message.contains("tend"), "{}", e.message);
    }

    #[test]
    fn sweep_points_in_index_order() {
        let s = SweepConfig {
            base: parse(MINIMAL).unwrap(),
            axes: Axes {
                a: Some(vec![0.1, 0.2]),
                k: Some(vec![1.0, 2.0, 3.0]),
                ..Axes::default()
            },
            xi_from_a: true,
            abscissa: false,
        };
        let p = s.points().unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!((p[0].a, p[0].k), (0.1, 1.0));
        assert_eq!((p[1].a, p[1].k), (0.1, 2.0));
        assert_eq!((p[5].a, p[5].k, p[5].xi), (0.2, 3.0, 0.4));
    }
}
