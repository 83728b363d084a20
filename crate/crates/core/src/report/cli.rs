use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::estimator::{
    aggregate_runs, estimate_pi_with, relative_error, required_samples, IntervalMethod, RunRow,
};
use crate::harness::{run_experiment_with_progress, ExperimentPlan, Progress};
use crate::report::{format_sig10, write_sweep_outputs};
use crate::sampling::{parallel_count, SeedSpec};
use crate::specfn::{stirling_ratio_approx, Dimension, ExactGeometry};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hyperpi", version, about = "Estimate π from hypersphere volume ratios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Interval {
    Wald,
    Wilson,
}

impl From<Interval> for IntervalMethod {
    fn from(i: Interval) -> Self {
        match i {
            Interval::Wald => IntervalMethod::Wald,
            Interval::Wilson => IntervalMethod::Wilson,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact ball volume, inside probability and Stirling asymptote.
    Analytic {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        dim: u32,
    },
    /// Monte Carlo estimates for one dimension and sample size.
    Estimate {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        dim: u32,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        runs: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "HYPERPI_WORKERS", value_parser = clap::value_parser!(u64).range(1..))]
        workers: Option<u64>,
        #[arg(long, value_enum, default_value_t = Interval::Wald)]
        interval: Interval,
    },
    /// Full sweep; writes runs.csv, summary.json, finals.svg and timing.svg.
    Sweep {
        #[arg(long, conflicts_with = "default", required_unless_present = "default")]
        plan: Option<PathBuf>,
        /// Use the built-in schedule for dimensions 2 to 20.
        #[arg(long)]
        default: bool,
        /// Restrict --default to these dimensions (comma separated, 1 to 20).
        #[arg(long, requires = "default", value_delimiter = ',', value_parser = clap::value_parser!(u32).range(1..=20))]
        dims: Vec<u32>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the plan's root seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "HYPERPI_WORKERS", value_parser = clap::value_parser!(u64).range(1..))]
        workers: Option<u64>,
    },
    /// Samples needed for a target relative standard error of the estimate.
    Size {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        dim: u32,
        #[arg(long = "target-rel-se")]
        target_rel_se: f64,
    },
}

fn dimension(d: u32) -> Dimension {
    Dimension::new(d).expect("clap enforces d >= 1")
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn human(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e12) {
        format!("{x:.9e}")
    } else {
        format_sig10(x)
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    cli_main_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn cli_main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{rendered}")
            } else {
                write!(out, "{rendered}")
            };
            return code;
        }
    };
    match run(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::InvalidPlan(_) | Error::Json(_) | Error::TargetOutOfRange(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            }
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn run(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match command {
        Command::Analytic { dim } => analytic(dimension(dim), out),
        Command::Estimate {
            dim,
            samples,
            runs,
            seed,
            workers,
            interval,
        } => {
            let workers = workers.map_or_else(default_workers, |w| w as usize);
            estimate(dimension(dim), samples, runs, seed, workers, interval.into(), out, err)
        }
        Command::Sweep {
            plan,
            default: _,
            dims,
            out: dir,
            seed,
            workers,
        } => {
            let mut plan = match plan {
                Some(path) => match ExperimentPlan::load(&path) {
                    Ok(p) => p,
                    Err(Error::Io { path, source }) => {
                        return Err(Error::InvalidPlan(format!(
                            "cannot read plan {}: {source}",
                            path.display()
                        )))
                    }
                    Err(e) => return Err(e),
                },
                None => {
                    let dims = if dims.is_empty() { (2..=20).collect() } else { dims };
                    let mut dims: Vec<Dimension> = dims.into_iter().map(dimension).collect();
                    dims.sort();
                    dims.dedup();
                    ExperimentPlan::with_default_schedule(dims, 0, default_workers())
                }
            };
            if let Some(seed) = seed {
                plan.root_seed = seed;
            }
            if let Some(w) = workers {
                plan.workers = w as usize;
            }
            sweep(&plan, &dir, out, err)
        }
        Command::Size { dim, target_rel_se } => {
            let n = required_samples(dimension(dim), target_rel_se)?;
            writeln!(out, "{n}").map_err(io)
        }
    }
}

fn analytic(d: Dimension, out: &mut dyn Write) -> Result<()> {
    let g = ExactGeometry::new(d);
    writeln!(out, "dimension = {d}").map_err(io)?;
    writeln!(out, "V = {}", human(g.ball_volume)).map_err(io)?;
    writeln!(out, "cube = {}", human(g.cube_volume)).map_err(io)?;
    writeln!(out, "P = {}", human(g.inside_probability)).map_err(io)?;
    if d.get() >= 2 {
        let approx = stirling_ratio_approx(d);
        writeln!(out, "stirling = {}", human(approx)).map_err(io)?;
        writeln!(out, "stirling/P = {}", human(approx / g.inside_probability)).map_err(io)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn estimate(
    d: Dimension,
    samples: u64,
    runs: u32,
    seed: u64,
    workers: usize,
    method: IntervalMethod,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    let mut values = Vec::with_capacity(runs as usize);
    for run in 0..runs {
        let hc = parallel_count(SeedSpec::new(seed, u64::from(run)), d, samples, workers)?;
        let est = estimate_pi_with(hc, method);
        let pi = est.pi_hat.map_or_else(|| "invalid".to_string(), |p| p.to_string());
        let se = est.std_error.map_or_else(|| "-".to_string(), human);
        let ci = est
            .interval
            .map_or_else(|| "-".to_string(), |ci| format!("[{}, {}]", human(ci.low), human(ci.high)));
        writeln!(
            out,
            "run {run}: hits = {} / {}  p_hat = {}  pi_hat = {pi}  se = {se}  ci95 = {ci}",
            est.hits,
            est.trials,
            human(est.p_hat)
        )
        .map_err(io)?;
        values.push(est.pi_hat);
    }
    let invalid = values.iter().filter(|v| v.is_none()).count();
    if invalid > 0 {
        writeln!(err, "warning: {invalid} of {runs} runs had zero hits and were excluded").map_err(io)?;
    }
    let summary = aggregate_runs(d, &[RunRow::new(samples, values, Vec::new())])?;
    writeln!(out, "average = {}", summary.final_estimate).map_err(io)?;
    writeln!(out, "relative_error = {}", human(relative_error(summary.final_estimate))).map_err(io)?;
    Ok(())
}

fn sweep(plan: &ExperimentPlan, dir: &std::path::Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let report = |p: Progress| {
        let step = (p.total / 20).max(1);
        if p.completed.is_multiple_of(step) || p.completed == p.total {
            eprintln!("progress: {}/{} cells", p.completed, p.total);
        }
    };
    let rs = run_experiment_with_progress(plan, &report)?;
    let outputs = write_sweep_outputs(&rs, dir)?;

    for s in &rs.summaries {
        writeln!(
            out,
            "d = {:>2}  final = {}  relative_error = {}",
            s.dimension.get(),
            format_sig10(s.final_estimate),
            human(s.relative_error)
        )
        .map_err(io)?;
    }
    if let Some(g) = rs.grand_mean {
        writeln!(out, "grand_mean = {}", format_sig10(g)).map_err(io)?;
    }
    let invalid = rs.invalid_runs();
    if invalid > 0 {
        writeln!(err, "warning: {invalid} runs had zero hits and were excluded").map_err(io)?;
    }
    if !rs.failures.is_empty() {
        writeln!(err, "warning: {} failures recorded in summary.json", rs.failures.len()).map_err(io)?;
    }
    writeln!(out, "wrote {}", outputs.runs_csv.display()).map_err(io)?;
    writeln!(out, "wrote {}", outputs.summary_json.display()).map_err(io)?;
    if let Some(p) = &outputs.finals_svg {
        writeln!(out, "wrote {}", p.display()).map_err(io)?;
    }
    writeln!(out, "wrote {}", outputs.timing_svg.display()).map_err(io)?;
    Ok(())
}
