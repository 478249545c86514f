use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use delaywave::fmt::num;
use delaywave::spectral::{dlp_threshold, rightmost_roots, DlpParams, SearchBox, SpectralResult};
use serde::Serialize;

use crate::error::CliResult;

pub const NO_CLAIM: &str = "condition not satisfied; no claim";
pub const CLAIM: &str = "gain below threshold; spectrum in an open left half-plane";

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    pub params: DlpParams,
    pub threshold: f64,
    pub below_threshold: bool,
    pub claim: &'static str,
    pub abscissa: Option<f64>,
    pub beta: Option<f64>,
    pub winding: i64,
    pub found: usize,
    pub winding_matches: bool,
    pub search_box: SearchBox,
}

pub fn spectrum(p: DlpParams, search_box: Option<SearchBox>) -> CliResult<(SpectrumSummary, SpectralResult)> {
    p.validate()?;
    let threshold = dlp_threshold(p.a)?;
    let b = search_box.unwrap_or_else(|| SearchBox::default_for(&p));
    let r = rightmost_roots(&p, &b, None)?;
    let below = p.k < threshold;
    let summary = SpectrumSummary {
        params: p,
        threshold,
        below_threshold: below,
        claim: if below { CLAIM } else { NO_CLAIM },
        abscissa: r.abscissa,
        beta: r.beta,
        winding: r.winding,
        found: r.found,
        winding_matches: r.winding == r.found as i64,
        search_box: r.search_box,
    };
    Ok((summary, r))
}

pub fn write(summary: &SpectrumSummary, roots: &SpectralResult, out: &Path) -> CliResult<()> {
    fs::create_dir_all(out)?;
    let mut w = BufWriter::new(fs::File::create(out.join("roots.csv"))?);
    let p = &summary.params;
    writeln!(w, "# a={} k={} tau={}", num(p.a), num(p.k), num(p.tau))?;
    roots.write_csv(&mut w)?;
    w.flush()?;
    let mut json = serde_json::to_string_pretty(summary)?;
    json.push('\n');
    fs::write(out.join("summary.json"), json)?;
    Ok(())
}
