//! Monte Carlo estimation of π from the fraction of uniform points of the cube
//! `[-1, 1]^d` that fall inside the inscribed unit ball.
//!
//! - [`specfn`]: exact volumes, inside probabilities and the recovery formula.
//! - [`sampling`]: seeded, seekable point streams and hit counting.
//! - [`estimator`]: estimates with standard errors, run aggregation, sizing.
//! - [`harness`]: experiment plans and sweeps.
//! - [`report`]: CSV, JSON, SVG and the command line.

pub mod error;
pub mod estimator;
pub mod harness;
pub mod report;
pub mod sampling;
pub mod specfn;

pub use error::{Error, Result};
pub use estimator::{
    aggregate_runs, estimate_pi, estimate_pi_with, relative_error, required_samples,
    standard_error, DimensionSummary, IntervalMethod, PiEstimate, RunRow,
};
pub use harness::{
    default_schedule, run_experiment, timing_curve, ExperimentPlan, ResultSet, Schedule, Tier,
};
pub use sampling::{count_hits, parallel_count, HitCount, SeedSpec};
pub use specfn::{
    inside_probability, log_gamma, pi_from_probability, stirling_ratio_approx, unit_ball_volume,
    Dimension, ExactGeometry,
};
