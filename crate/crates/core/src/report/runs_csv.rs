use std::io::{Read, Write};

use serde::Deserialize;

use crate::error::Result;
use crate::harness::ResultSet;

pub const CSV_HEADER: [&str; 11] = [
    "dimension",
    "sample_size",
    "run",
    "seed_stream",
    "trials",
    "hits",
    "p_hat",
    "pi_hat",
    "valid",
    "std_error",
    "wall_time_ms",
];

/// Plain decimal with 10 significant digits.
pub fn format_sig10(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let text = format!("{:.*}", (9 - magnitude).max(0) as usize, x);
    // Rounding may carry into the next power of ten.
    let rounded: f64 = text.parse().unwrap_or(x);
    if rounded.abs().log10().floor() as i32 > magnitude {
        format!("{:.*}", (8 - magnitude).max(0) as usize, x)
    } else {
        text
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig10).unwrap_or_default()
}

/// One row per run, ordered by dimension, sample size, run.
pub fn write_run_csv<W: Write>(rs: &ResultSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &rs.runs {
        w.write_record([
            r.dimension.to_string(),
            r.sample_size.to_string(),
            r.run.to_string(),
            r.seed_stream.to_string(),
            r.trials.to_string(),
            r.hits.map(|h| h.to_string()).unwrap_or_default(),
            opt(r.p_hat),
            opt(r.pi_hat),
            r.valid.to_string(),
            opt(r.std_error),
            format_sig10(r.wall_time_ms),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// A parsed CSV row.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CsvRun {
    pub dimension: u32,
    pub sample_size: u64,
    pub run: u32,
    pub seed_stream: u64,
    pub trials: u64,
    pub hits: Option<u64>,
    pub p_hat: Option<f64>,
    pub pi_hat: Option<f64>,
    pub valid: bool,
    pub std_error: Option<f64>,
    pub wall_time_ms: f64,
}

pub fn read_run_csv<R: Read>(input: R) -> Result<Vec<CsvRun>> {
    let mut rdr = csv::Reader::from_reader(input);
    let rows = rdr.deserialize().collect::<std::result::Result<Vec<CsvRun>, _>>()?;
    Ok(rows)
}
