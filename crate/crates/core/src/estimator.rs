//! From hit counts to estimates of π, with uncertainty, and the repeated-run
//! averaging protocol (runs → per-size average → final value).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::HitCount;
use crate::specfn::{inside_probability, pi_from_probability, Dimension};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalMethod {
    /// Delta-method interval, `pi_hat ± z·SE`.
    #[default]
    Wald,
    /// Wilson score interval on the hit fraction, mapped through the
    /// recovery formula. Stays inside the valid range when hits are sparse.
    Wilson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiEstimate {
    pub dimension: Dimension,
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    /// `None` when there were no hits.
    pub pi_hat: Option<f64>,
    /// `None` when invalid, or when every point hit at `d >= 2`.
    pub std_error: Option<f64>,
    pub interval: Option<ConfidenceInterval>,
    pub valid: bool,
}

/// Estimate with a Wald interval.
pub fn estimate_pi(hc: HitCount) -> PiEstimate {
    estimate_pi_with(hc, IntervalMethod::Wald)
}

pub fn estimate_pi_with(hc: HitCount, method: IntervalMethod) -> PiEstimate {
    let d = hc.dimension;
    let p_hat = hc.fraction();
    let mut est = PiEstimate {
        dimension: d,
        trials: hc.trials,
        hits: hc.hits,
        p_hat,
        pi_hat: None,
        std_error: None,
        interval: None,
        valid: false,
    };
    if hc.hits == 0 {
        return est;
    }
    let pi_hat = pi_from_probability(p_hat, d).expect("0 < p_hat <= 1");
    est.pi_hat = Some(pi_hat);
    est.valid = true;

    if d.get() == 1 {
        // Every point of [-1, 1] hits: no variance at all.
        est.std_error = Some(0.0);
        est.interval = Some(ConfidenceInterval {
            low: pi_hat,
            high: pi_hat,
        });
        return est;
    }

    est.std_error = standard_error(p_hat, hc.trials, d, pi_hat);
    est.interval = match method {
        IntervalMethod::Wald => est.std_error.map(|se| ConfidenceInterval {
            low: (pi_hat - Z_95 * se).max(0.0),
            high: pi_hat + Z_95 * se,
        }),
        IntervalMethod::Wilson => Some(wilson_interval(hc, Z_95)),
    };
    est
}

fn wilson_interval(hc: HitCount, z: f64) -> ConfidenceInterval {
    let n = hc.trials as f64;
    let p = hc.fraction();
    let z2 = z * z;
    let center = p + z2 / (2.0 * n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let denom = 1.0 + z2 / n;
    let lo = ((center - half) / denom).clamp(f64::MIN_POSITIVE, p);
    let hi = ((center + half) / denom).clamp(p, 1.0);
    let d = hc.dimension;
    ConfidenceInterval {
        low: pi_from_probability(lo, d).expect("lo in (0, 1]"),
        high: pi_from_probability(hi, d).expect("hi in (0, 1]"),
    }
}

/// First-order delta-method standard error of `pi_hat`:
/// `(2/d) · (pi_hat / p_hat) · √(p_hat (1 − p_hat) / trials)`.
///
/// Undefined (`None`) when `p_hat` is 0 or 1.
pub fn standard_error(p_hat: f64, trials: u64, d: Dimension, pi_hat: f64) -> Option<f64> {
    if !(p_hat > 0.0 && p_hat < 1.0) || trials == 0 {
        return None;
    }
    let binomial = (p_hat * (1.0 - p_hat) / trials as f64).sqrt();
    Some(2.0 / d.as_f64() * (pi_hat / p_hat) * binomial)
}

/// Trials needed for the relative standard error of `pi_hat` to reach
/// `target_rel_se`: `⌈(2/(d·ε))² · (1 − P)/P⌉`, at least 1.
///
/// Saturates at `u64::MAX` in dimensions where the count is not representable.
pub fn required_samples(d: Dimension, target_rel_se: f64) -> Result<u64> {
    if !(target_rel_se > 0.0 && target_rel_se < 1.0) {
        return Err(Error::TargetOutOfRange(target_rel_se));
    }
    let p = inside_probability(d);
    if p >= 1.0 {
        return Ok(1);
    }
    let scale = 2.0 / (d.as_f64() * target_rel_se);
    let n = (scale * scale * (1.0 - p) / p).ceil();
    // `as` saturates on overflow and maps +inf to u64::MAX.
    Ok((n as u64).max(1))
}

/// Signed relative error against the double nearest π.
pub fn relative_error(final_estimate: f64) -> f64 {
    (final_estimate - PI) / PI
}

/// One sample size's worth of runs. `None` marks a run with no hits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub sample_size: u64,
    pub estimates: Vec<Option<f64>>,
    /// Either empty or one entry per run.
    pub wall_times_ms: Vec<f64>,
}

impl RunRow {
    pub fn new(sample_size: u64, estimates: Vec<Option<f64>>, wall_times_ms: Vec<f64>) -> Self {
        RunRow {
            sample_size,
            estimates,
            wall_times_ms,
        }
    }

    /// Row of valid estimates without timings.
    pub fn from_values(sample_size: u64, values: &[f64]) -> Self {
        RunRow::new(sample_size, values.iter().copied().map(Some).collect(), Vec::new())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub sample_size: u64,
    /// Valid runs only.
    pub run_estimates: Vec<f64>,
    pub average: f64,
    pub wall_times_ms: Vec<f64>,
    pub excluded_invalid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSummary {
    pub dimension: Dimension,
    pub rows: Vec<SummaryRow>,
    #[serde(rename = "final")]
    pub final_estimate: f64,
    pub relative_error: f64,
    pub excluded_invalid_runs: usize,
    /// Sample sizes whose every run was invalid.
    pub dropped_rows: Vec<u64>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Averages runs per row, then rows into a final value.
///
/// Invalid runs are excluded and counted. A row with no valid run is dropped
/// with a warning; if nothing is left the aggregation fails.
pub fn aggregate_runs(d: Dimension, rows: &[RunRow]) -> Result<DimensionSummary> {
    let mut summary_rows = Vec::with_capacity(rows.len());
    let mut dropped_rows = Vec::new();
    let mut excluded = 0;

    for row in rows {
        if !row.wall_times_ms.is_empty() && row.wall_times_ms.len() != row.estimates.len() {
            return Err(Error::InvalidPlan(format!(
                "row {} has {} estimates but {} wall times",
                row.sample_size,
                row.estimates.len(),
                row.wall_times_ms.len()
            )));
        }
        let valid: Vec<f64> = row.estimates.iter().flatten().copied().collect();
        let invalid = row.estimates.len() - valid.len();
        excluded += invalid;
        if valid.is_empty() {
            log::warn!(
                "dimension {d}: every run at sample size {} was invalid; row dropped",
                row.sample_size
            );
            dropped_rows.push(row.sample_size);
            continue;
        }
        summary_rows.push(SummaryRow {
            sample_size: row.sample_size,
            average: mean(&valid),
            run_estimates: valid,
            wall_times_ms: row.wall_times_ms.clone(),
            excluded_invalid: invalid,
        });
    }

    if summary_rows.is_empty() {
        return Err(Error::EmptyAggregation(d.get()));
    }
    let averages: Vec<f64> = summary_rows.iter().map(|r| r.average).collect();
    let final_estimate = mean(&averages);
    Ok(DimensionSummary {
        dimension: d,
        rows: summary_rows,
        final_estimate,
        relative_error: relative_error(final_estimate),
        excluded_invalid_runs: excluded,
        dropped_rows,
    })
}
