//! Output side: CSV of every run, JSON summary, SVG charts and the CLI.

pub mod cli;
mod runs_csv;
mod summary_json;
mod svg;

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub use runs_csv::{format_sig10, read_run_csv, write_run_csv, CsvRun, CSV_HEADER};
pub use summary_json::{write_summary_json, SummaryDocument, SUMMARY_FORMAT_VERSION};
pub use svg::{render_line_chart, ChartOptions, ChartSeries};

use crate::error::{Error, Result};
use crate::harness::{timing_curve, ResultSet};

const MS_PER_MINUTE: f64 = 60_000.0;

/// Final estimate per dimension. `None` when no dimension aggregated.
pub fn finals_series(rs: &ResultSet) -> Option<ChartSeries> {
    let points: Vec<(f64, f64)> = rs
        .summaries
        .iter()
        .map(|s| (s.dimension.as_f64(), s.final_estimate))
        .collect();
    (!points.is_empty())
        .then(|| ChartSeries::new("final estimate", points).with_axes("dimension", "final estimate of π"))
}

/// Representative computation time per dimension, in minutes. Dimensions
/// without a timing point are drawn at 0.
pub fn timing_series(rs: &ResultSet) -> ChartSeries {
    let curve = timing_curve(rs);
    let mut dims = rs.plan.dimensions.clone();
    dims.sort();
    let points = dims
        .into_iter()
        .map(|d| {
            let ms = curve.iter().find(|(cd, _)| *cd == d).map_or(0.0, |&(_, ms)| ms);
            (d.as_f64(), ms / MS_PER_MINUTE)
        })
        .collect();
    ChartSeries::new("computation time", points).with_axes("dimension", "minutes")
}

pub fn finals_chart(rs: &ResultSet) -> Result<String> {
    let series = finals_series(rs)
        .ok_or_else(|| Error::InvalidChart("no aggregated dimension to plot".into()))?;
    let opts = ChartOptions {
        title: "Final estimate of π by dimension".into(),
        reference_y: Some((PI, "π".into())),
        ..ChartOptions::default()
    };
    render_line_chart(&[series], &opts)
}

pub fn timing_chart(rs: &ResultSet) -> Result<String> {
    let opts = ChartOptions {
        title: "Computation time by dimension".into(),
        ..ChartOptions::default()
    };
    render_line_chart(&[timing_series(rs)], &opts)
}

/// Files written by a sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepOutputs {
    pub runs_csv: PathBuf,
    pub summary_json: PathBuf,
    pub finals_svg: Option<PathBuf>,
    pub timing_svg: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes())
        .and_then(|_| f.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_run_csv_file(rs: &ResultSet, path: &Path) -> Result<()> {
    write_run_csv(rs, create(path)?)
}

pub fn write_summary_json_file(rs: &ResultSet, path: &Path) -> Result<()> {
    write_summary_json(rs, create(path)?)
}

/// Writes `runs.csv`, `summary.json`, `finals.svg` and `timing.svg` into
/// `dir`, creating it if needed. The finals chart is skipped when no
/// dimension could be aggregated.
pub fn write_sweep_outputs(rs: &ResultSet, dir: &Path) -> Result<SweepOutputs> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let outputs = SweepOutputs {
        runs_csv: dir.join("runs.csv"),
        summary_json: dir.join("summary.json"),
        finals_svg: (!rs.summaries.is_empty()).then(|| dir.join("finals.svg")),
        timing_svg: dir.join("timing.svg"),
    };
    write_run_csv_file(rs, &outputs.runs_csv)?;
    write_summary_json_file(rs, &outputs.summary_json)?;
    if let Some(path) = &outputs.finals_svg {
        write_text(path, &finals_chart(rs)?)?;
    } else {
        log::warn!("no dimension aggregated; finals chart skipped");
    }
    write_text(&outputs.timing_svg, &timing_chart(rs)?)?;
    Ok(outputs)
}
