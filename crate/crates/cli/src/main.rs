mod config;
mod error;
mod region;
mod simulate;
mod spectrum;
mod sweep;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use delaywave::fmt::num;
use delaywave::spectral::{DlpParams, SearchBox};
use delaywave::verify;

use crate::config::{load, SimConfig, SweepConfig};
use crate::error::{CliError, CliResult};
use crate::region::{Overrides, Preset};

#[derive(Debug, Parser)]
#[command(name = "delaywave", version, about = "Delayed-damping wave equation: runs, stability regions and spectra")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "DELAYWAVE_OUT", default_value = "out")]
    out: PathBuf,
    /// JSON configuration (simulate, sweep).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for sweeps and verify; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    parallel: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation: energy.csv, summary.json, snapshots/.
    Simulate,
    /// Explicit weights, a0(k) and the admissible (a, xi) polygon.
    Region {
        #[arg(long, allow_negative_numbers = true)]
        k: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        tau: f64,
        #[arg(long, value_enum, default_value = "interval-unit")]
        preset: Preset,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        m_inf: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        delta: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        cp: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        c0p: Option<f64>,
        /// Also report the margins at `a,xi`.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        point: Option<Vec<f64>>,
    },
    /// Rightmost characteristic roots of the 1D boundary-delay system.
    Spectrum {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        k: f64,
        #[arg(long, allow_negative_numbers = true)]
        tau: f64,
        #[arg(long, allow_negative_numbers = true)]
        re_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        re_max: Option<f64>,
        #[arg(long)]
        im_max: Option<f64>,
        #[arg(long)]
        n_re: Option<usize>,
        #[arg(long)]
        n_im: Option<usize>,
    },
    /// Run a parameter grid: sweep.csv.
    Sweep,
    /// Run the built-in acceptance checks and print the report.
    Verify,
}

fn require(config: &Option<PathBuf>, cmd: &str) -> CliResult<PathBuf> {
    config
        .clone()
        .ok_or_else(|| CliError::config(format!("{cmd} needs --config <path>")))
}

fn execute(cli: Cli) -> CliResult<ExitCode> {
    let out: &Path = &cli.out;
    match cli.command {
        Command::Simulate => {
            let cfg: SimConfig = load(&require(&cli.config, "simulate")?)?;
            let sim = simulate::simulate(&cfg)?;
            simulate::write(&sim, out)?;
            let s = &sim.summary;
            let c2 = s.fit.map(|f| num(f.c2)).unwrap_or_else(|| "-".into());
            let bound = s.bound_check.as_ref().map_or("-".to_string(), |b| b.holds.to_string());
            println!("status={} C2_fit={c2} bound_check={bound} out={}", s.status, out.display());
        }
        Command::Region {
            k,
            tau,
            preset,
            n,
            m_inf,
            delta,
            cp,
            c0p,
            point,
        } => {
            let point = match point.as_deref() {
                None => None,
                Some([a, xi]) => Some((*a, *xi)),
                Some(_) => return Err(CliError::config("--point takes two values: a,xi")),
            };
            let overrides = Overrides {
                n,
                m_inf,
                delta,
                cp,
                c0p,
            };
            let g = region::constants(preset, &overrides)?;
            let report = region::region(k, tau, &g, point)?;
            region::write(&report, out)?;
            println!(
                "a0={} vertices={} out={}",
                num(report.a0),
                report.polygon.vertices.len(),
                out.display()
            );
        }
        Command::Spectrum {
            a,
            k,
            tau,
            re_min,
            re_max,
            im_max,
            n_re,
            n_im,
        } => {
            let p = DlpParams::new(a, k, tau);
            let mut b = SearchBox::default_for(&p);
            b.re_min = re_min.unwrap_or(b.re_min);
            b.re_max = re_max.unwrap_or(b.re_max);
            b.im_max = im_max.unwrap_or(b.im_max);
            b.n_re = n_re.unwrap_or(b.n_re);
            b.n_im = n_im.unwrap_or(b.n_im);
            let (summary, roots) = spectrum::spectrum(p, Some(b))?;
            spectrum::write(&summary, &roots, out)?;
            println!(
                "abscissa={} threshold={} {} out={}",
                summary.abscissa.map(num).unwrap_or_else(|| "-".into()),
                num(summary.threshold),
                summary.claim,
                out.display()
            );
        }
        Command::Sweep => {
            let cfg: SweepConfig = load(&require(&cli.config, "sweep")?)?;
            let rows = sweep::sweep(&cfg, cli.parallel)?;
            sweep::write(&rows, out)?;
            println!("rows={} out={}", rows.len(), out.display());
        }
        Command::Verify => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cli.parallel)
                .build()
                .map_err(|e| CliError::other(format!("thread pool: {e}")))?;
            let reports = pool.install(verify::run_all);
            let text = verify::render(&reports);
            print!("{text}");
            fs::create_dir_all(out)?;
            fs::write(out.join("verify.txt"), &text)?;
            if !reports.iter().all(|r| r.pass) {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
