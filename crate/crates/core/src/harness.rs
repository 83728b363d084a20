//! Declarative sweeps over dimensions, sample sizes and repeated runs.
//!
//! A plan expands into cells `(dimension, size index, run index)`. Each cell
//! gets its own stream `cell_stream(d, size, run)` under the plan's root seed,
//! so estimates depend on the plan alone and never on scheduling or on the
//! worker count. Cells run concurrently on one pool and large cells fan out
//! further across the same pool.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{aggregate_runs, estimate_pi, DimensionSummary, RunRow};
use crate::sampling::{count_segmented, SeedSpec};
use crate::specfn::Dimension;

/// Runs per size when the schedule comes from a target relative error.
pub const ADAPTIVE_RUNS: u32 = 5;

const DIMENSION_BITS: u32 = 24;
const SIZE_INDEX_BITS: u32 = 16;
const RUN_BITS: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tier {
    pub sample_size: u64,
    pub run_count: u32,
}

impl Tier {
    pub const fn new(sample_size: u64, run_count: u32) -> Self {
        Tier {
            sample_size,
            run_count,
        }
    }
}

const fn tiers<const N: usize>(sizes: [u64; N], runs: u32) -> [Tier; N] {
    let mut out = [Tier::new(0, 0); N];
    let mut i = 0;
    while i < N {
        out[i] = Tier::new(sizes[i], runs);
        i += 1;
    }
    out
}

/// Sample-size tiers used for dimensions 1 through 20.
///
/// The irregular rows (d = 13 using the d = 9 sizes, the 2.5·10⁷ tier at
/// d = 20, two runs at 10⁸) are kept as they were run.
pub fn default_schedule(d: Dimension) -> Result<Vec<Tier>> {
    const LOW: [u64; 3] = [1_000, 5_000, 10_000];
    const MID: [u64; 3] = [10_000, 50_000, 100_000];
    const UPPER: [u64; 3] = [100_000, 500_000, 1_000_000];
    Ok(match d.get() {
        1..=7 => tiers(LOW, 5).to_vec(),
        8 => tiers([1_000, 5_000, 10_000, 50_000, 100_000], 5).to_vec(),
        9 | 10 | 13 => tiers(MID, 5).to_vec(),
        11 => tiers([10_000, 50_000, 100_000, 500_000, 1_000_000], 5).to_vec(),
        12 | 14 => tiers(UPPER, 5).to_vec(),
        15 => tiers([1_000_000, 5_000_000, 10_000_000], 5).to_vec(),
        16..=19 => vec![
            Tier::new(10_000_000, 5),
            Tier::new(50_000_000, 5),
            Tier::new(100_000_000, 2),
        ],
        20 => vec![
            Tier::new(25_000_000, 5),
            Tier::new(50_000_000, 5),
            Tier::new(100_000_000, 2),
        ],
        other => return Err(Error::NoDefaultSchedule(other)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedSchedule {
    Default,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, try_from = "RawSchedule")]
pub enum Schedule {
    Named(NamedSchedule),
    Explicit(BTreeMap<Dimension, Vec<Tier>>),
}

// Untagged content buffers map keys as strings, so dimensions are parsed here.
#[derive(Deserialize)]
#[serde(untagged)]
enum RawSchedule {
    Named(NamedSchedule),
    Explicit(BTreeMap<String, Vec<Tier>>),
}

impl TryFrom<RawSchedule> for Schedule {
    type Error = Error;

    fn try_from(raw: RawSchedule) -> Result<Self> {
        match raw {
            RawSchedule::Named(n) => Ok(Schedule::Named(n)),
            RawSchedule::Explicit(map) => map
                .into_iter()
                .map(|(key, tiers)| {
                    let d = key
                        .trim()
                        .parse::<u32>()
                        .map_err(|_| Error::InvalidPlan(format!("schedule key '{key}' is not a dimension")))?;
                    Ok((Dimension::new(d)?, tiers))
                })
                .collect::<Result<_>>()
                .map(Schedule::Explicit),
        }
    }
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Named(NamedSchedule::Default)
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub dimensions: Vec<Dimension>,
    #[serde(default)]
    pub schedule: Schedule,
    pub root_seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive_target: Option<f64>,
}

impl ExperimentPlan {
    /// Default-schedule plan over `dimensions`.
    pub fn with_default_schedule(dimensions: Vec<Dimension>, root_seed: u64, workers: usize) -> Self {
        ExperimentPlan {
            dimensions,
            schedule: Schedule::default(),
            root_seed,
            workers,
            adaptive_target: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: ExperimentPlan = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Tiers to run for `d`. An adaptive target takes precedence.
    pub fn tiers_for(&self, d: Dimension) -> Result<Vec<Tier>> {
        if let Some(target) = self.adaptive_target {
            let n = crate::estimator::required_samples(d, target)?;
            return Ok(vec![Tier::new(n, ADAPTIVE_RUNS)]);
        }
        match &self.schedule {
            Schedule::Named(NamedSchedule::Default) => default_schedule(d),
            Schedule::Explicit(map) => map
                .get(&d)
                .cloned()
                .ok_or_else(|| Error::InvalidPlan(format!("no schedule rows for dimension {d}"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidPlan(msg));
        if self.dimensions.is_empty() {
            return invalid("no dimensions".into());
        }
        if self.workers == 0 {
            return invalid("workers must be at least 1".into());
        }
        let mut seen = BTreeSet::new();
        for &d in &self.dimensions {
            if !seen.insert(d) {
                return invalid(format!("dimension {d} listed twice"));
            }
            if u64::from(d.get()) >= 1 << DIMENSION_BITS {
                return invalid(format!("dimension {d} too large"));
            }
            let tiers = self.tiers_for(d)?;
            if tiers.is_empty() {
                return invalid(format!("dimension {d} has an empty schedule"));
            }
            if tiers.len() as u64 >= 1 << SIZE_INDEX_BITS {
                return invalid(format!("dimension {d} has too many schedule rows"));
            }
            for t in tiers {
                if t.sample_size == 0 || t.run_count == 0 {
                    return invalid(format!("dimension {d}: sample_size and run_count must be >= 1"));
                }
                if u64::from(t.run_count) >= 1 << RUN_BITS {
                    return invalid(format!("dimension {d}: too many runs"));
                }
            }
        }
        Ok(())
    }
}

/// Stream index of one cell: dimension, size index and run index packed into
/// disjoint bit fields, so distinct cells never share a stream.
pub fn cell_stream(d: Dimension, size_index: u32, run: u32) -> u64 {
    debug_assert!(u64::from(d.get()) < 1 << DIMENSION_BITS);
    debug_assert!(u64::from(size_index) < 1 << SIZE_INDEX_BITS);
    debug_assert!(u64::from(run) < 1 << RUN_BITS);
    (u64::from(d.get()) << (SIZE_INDEX_BITS + RUN_BITS))
        | (u64::from(size_index) << RUN_BITS)
        | u64::from(run)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dimension: Dimension,
    pub sample_size: u64,
    pub size_index: u32,
    pub run: u32,
    pub seed_stream: u64,
    pub trials: u64,
    /// `None` when the cell failed.
    pub hits: Option<u64>,
    pub p_hat: Option<f64>,
    pub pi_hat: Option<f64>,
    pub valid: bool,
    pub std_error: Option<f64>,
    pub wall_time_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Something that did not produce a usable result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub dimension: Dimension,
    pub sample_size: Option<u64>,
    pub run: Option<u32>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub plan: ExperimentPlan,
    pub summaries: Vec<DimensionSummary>,
    pub runs: Vec<RunRecord>,
    pub failures: Vec<Failure>,
    /// Mean of the summaries' final values.
    pub grand_mean: Option<f64>,
}

impl ResultSet {
    /// Assembles a result set from per-run records, aggregating each dimension.
    pub fn from_runs(plan: ExperimentPlan, mut runs: Vec<RunRecord>) -> ResultSet {
        runs.sort_by_key(|r| (r.dimension, r.size_index, r.run));
        let mut failures: Vec<Failure> = runs
            .iter()
            .filter_map(|r| {
                r.error.as_ref().map(|reason| Failure {
                    dimension: r.dimension,
                    sample_size: Some(r.sample_size),
                    run: Some(r.run),
                    reason: reason.clone(),
                })
            })
            .collect();

        let mut dims: Vec<Dimension> = plan.dimensions.clone();
        dims.sort();
        let mut summaries = Vec::new();
        for d in dims {
            let mut rows: Vec<RunRow> = Vec::new();
            for r in runs.iter().filter(|r| r.dimension == d && !r.failed()) {
                match rows.last_mut() {
                    Some(row) if row.sample_size == r.sample_size => {
                        row.estimates.push(r.pi_hat);
                        row.wall_times_ms.push(r.wall_time_ms);
                    }
                    _ => rows.push(RunRow::new(r.sample_size, vec![r.pi_hat], vec![r.wall_time_ms])),
                }
            }
            match aggregate_runs(d, &rows) {
                Ok(s) => summaries.push(s),
                Err(e) => {
                    log::warn!("dimension {d}: {e}");
                    failures.push(Failure {
                        dimension: d,
                        sample_size: None,
                        run: None,
                        reason: e.to_string(),
                    });
                }
            }
        }
        let grand_mean = (!summaries.is_empty()).then(|| {
            summaries.iter().map(|s| s.final_estimate).sum::<f64>() / summaries.len() as f64
        });
        ResultSet {
            plan,
            summaries,
            runs,
            failures,
            grand_mean,
        }
    }

    pub fn invalid_runs(&self) -> usize {
        self.runs.iter().filter(|r| !r.valid && !r.failed()).count()
    }

    pub fn summary(&self, d: Dimension) -> Option<&DimensionSummary> {
        self.summaries.iter().find(|s| s.dimension == d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progress {
    pub completed: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    dimension: Dimension,
    size_index: u32,
    run: u32,
    sample_size: u64,
    seed: SeedSpec,
}

fn expand(plan: &ExperimentPlan) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for &d in &plan.dimensions {
        for (size_index, tier) in plan.tiers_for(d)?.into_iter().enumerate() {
            let size_index = size_index as u32;
            for run in 0..tier.run_count {
                cells.push(Cell {
                    dimension: d,
                    size_index,
                    run,
                    sample_size: tier.sample_size,
                    seed: SeedSpec::new(plan.root_seed, cell_stream(d, size_index, run)),
                });
            }
        }
    }
    Ok(cells)
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "cell panicked".to_string()
    }
}

fn run_cell(cell: &Cell) -> RunRecord {
    let start = Instant::now();
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| {
        count_segmented(cell.seed, cell.dimension, cell.sample_size)
    }))
    .unwrap_or_else(|payload| Err(Error::CellAborted(panic_message(payload))));
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut record = RunRecord {
        dimension: cell.dimension,
        sample_size: cell.sample_size,
        size_index: cell.size_index,
        run: cell.run,
        seed_stream: cell.seed.stream,
        trials: cell.sample_size,
        hits: None,
        p_hat: None,
        pi_hat: None,
        valid: false,
        std_error: None,
        wall_time_ms,
        error: None,
    };
    match outcome {
        Ok(hc) => {
            let est = estimate_pi(hc);
            record.hits = Some(est.hits);
            record.p_hat = Some(est.p_hat);
            record.pi_hat = est.pi_hat;
            record.valid = est.valid;
            record.std_error = est.std_error;
        }
        Err(e) => {
            log::warn!(
                "cell d={} n={} run={} failed: {e}",
                cell.dimension,
                cell.sample_size,
                cell.run
            );
            record.error = Some(e.to_string());
        }
    }
    record
}

pub fn run_experiment(plan: &ExperimentPlan) -> Result<ResultSet> {
    run_experiment_with_progress(plan, &|_| {})
}

/// Runs every cell of `plan`. A failing cell is recorded and the sweep goes
/// on; only an invalid plan is an error.
pub fn run_experiment_with_progress(
    plan: &ExperimentPlan,
    on_progress: &(dyn Fn(Progress) + Sync),
) -> Result<ResultSet> {
    plan.validate()?;
    let cells = expand(plan)?;
    let total = cells.len();
    let completed = AtomicUsize::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| Error::InvalidPlan(format!("cannot start {} workers: {e}", plan.workers)))?;

    let runs: Vec<RunRecord> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let record = run_cell(cell);
                let done = completed.fetch_add(1, Ordering::Relaxed) + 1;
                on_progress(Progress {
                    completed: done,
                    total,
                });
                record
            })
            .collect()
    });
    Ok(ResultSet::from_runs(plan.clone(), runs))
}

/// Representative time per dimension: mean wall time over the runs of its two
/// largest sample sizes. Dimensions with fewer than two sizes are skipped.
pub fn timing_curve(rs: &ResultSet) -> Vec<(Dimension, f64)> {
    let mut by_dim: BTreeMap<Dimension, BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for r in rs.runs.iter().filter(|r| !r.failed()) {
        by_dim
            .entry(r.dimension)
            .or_default()
            .entry(r.sample_size)
            .or_default()
            .push(r.wall_time_ms);
    }
    let mut curve = Vec::new();
    for (d, sizes) in by_dim {
        if sizes.len() < 2 {
            log::warn!("dimension {d}: fewer than two sample sizes, omitted from timing curve");
            continue;
        }
        let times: Vec<f64> = sizes.values().rev().take(2).flatten().copied().collect();
        curve.push((d, times.iter().sum::<f64>() / times.len() as f64));
    }
    curve
}
