use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimator::DimensionSummary;
use crate::harness::{Failure, ResultSet};

pub const SUMMARY_FORMAT_VERSION: u32 = 1;

/// The summary document: per-dimension finals and relative errors plus the
/// grand mean over dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDocument {
    pub format_version: u32,
    pub root_seed: u64,
    pub summaries: Vec<DimensionSummary>,
    pub grand_mean: Option<f64>,
    pub invalid_runs: usize,
    pub failures: Vec<Failure>,
}

impl SummaryDocument {
    pub fn from_result_set(rs: &ResultSet) -> Self {
        SummaryDocument {
            format_version: SUMMARY_FORMAT_VERSION,
            root_seed: rs.plan.root_seed,
            summaries: rs.summaries.clone(),
            grand_mean: rs.grand_mean,
            invalid_runs: rs.invalid_runs(),
            failures: rs.failures.clone(),
        }
    }
}

pub fn write_summary_json<W: Write>(rs: &ResultSet, out: W) -> Result<()> {
    let doc = SummaryDocument::from_result_set(rs);
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n").map_err(serde_json::Error::io)?;
    Ok(())
}
