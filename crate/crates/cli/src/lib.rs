//! Command-line driver: `solve-linear`, `solve-semilinear`, `simulate-sir`, `ml-eval`
//! and `verify-inequalities`.
//!
//! Exit codes: 0 on success (a detected blow-up is a successful run), 1 when a
//! computation fails or inequality violations are found, 2 for invalid input.
//! `VARFRAC_THREADS` caps the worker pool.

pub mod config;
pub mod error;
pub mod output;
pub mod problem;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use varfrac::bounds::run_suites;
use varfrac::mittag_leffler::ml_scalar;
use varfrac::solver::{BlowUpTrigger, Status};
use varfrac::Error as CoreError;

pub use config::{load, parse, LoadedConfig, ProblemKind, RunConfig};
pub use error::CliError;
pub use problem::{execute, RunOutput};

#[derive(Debug, Parser)]
#[command(name = "varfrac", version, about = "Evolution equations with a space-dependent fractional order")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve cD^α u = A u.
    SolveLinear(SolveArgs),
    /// Solve cD^α u = A u + f(u) with blow-up detection.
    SolveSemilinear(SolveArgs),
    /// Run the space-structured SIR model.
    SimulateSir {
        #[command(flatten)]
        solve: SolveArgs,
        /// Diagnostics CSV, overriding `output.diagnostics`.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Evaluate E_{α,β}(z).
    MlEval {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, allow_negative_numbers = true)]
        z: f64,
    },
    /// Sample the kernel and Gamma-function inequalities.
    VerifyInequalities {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the table here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, clap::Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    /// Solution CSV, overriding `output.csv`. Without either, the CSV goes to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(stderr, "error: {e}");
        return e.exit_code();
    }
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("VARFRAC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::config("VARFRAC_THREADS", "must be a positive integer"))?;
    // Fails only when a pool already exists, e.g. on a second call in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::SolveLinear(args) => solve(ProblemKind::Linear, &args, None, stdout, stderr),
        Command::SolveSemilinear(args) => solve(ProblemKind::Semilinear, &args, None, stdout, stderr),
        Command::SimulateSir { solve: args, diagnostics } => {
            solve(ProblemKind::Sir, &args, diagnostics, stdout, stderr)
        }
        Command::MlEval { alpha, beta, z } => {
            let value = ml_scalar(alpha, beta, z).map_err(|e| match e {
                CoreError::InvalidParameter { name, reason } => CliError::config(name, reason),
                other => CliError::Solver(other),
            })?;
            writeln!(stdout, "{value}").map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
        Command::VerifyInequalities { samples, seed, output } => {
            if samples == 0 {
                return Err(CliError::config("--samples", "must be positive"));
            }
            let clock = Instant::now();
            let rows = run_suites(samples, seed);
            write_csv(output.as_deref(), stdout, |w| output::write_suites(w, &rows))?;
            let violations: usize = rows.iter().map(|r| r.violations).sum();
            let _ = writeln!(
                stderr,
                "status={} violations={violations} runtime={:.3}s",
                if violations == 0 { "pass" } else { "fail" },
                clock.elapsed().as_secs_f64()
            );
            if violations == 0 {
                Ok(())
            } else {
                Err(CliError::Violations(violations))
            }
        }
    }
}

/// Runs `write` against `path`, or against stdout when there is none.
fn write_csv(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    write: impl FnOnce(&mut dyn Write) -> csv::Result<()>,
) -> Result<(), CliError> {
    let shown = path.unwrap_or(Path::new("<stdout>")).to_path_buf();
    let to_error = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(&shown, io),
        other => CliError::Parse(format!("{other:?}")),
    };
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            let file = File::create(p).map_err(|e| CliError::io(p, e))?;
            let mut w = BufWriter::new(file);
            write(&mut w).map_err(to_error)?;
            w.flush().map_err(|e| CliError::io(p, e))
        }
        None => write(stdout).map_err(to_error),
    }
}

fn solve(
    kind: ProblemKind,
    args: &SolveArgs,
    diagnostics: Option<PathBuf>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let loaded = load(&args.config)?;
    if loaded.config.problem != kind {
        return Err(CliError::config(
            "problem",
            format!("this config is for `{}`", loaded.config.problem.subcommand()),
        ));
    }
    let clock = Instant::now();
    let result = execute(&loaded)?;
    let runtime = clock.elapsed().as_secs_f64();

    let out = &loaded.config.output;
    let csv_path = args.output.clone().or_else(|| out.csv.clone());
    let stride = out.stride;
    match &result {
        RunOutput::Solve(report) => {
            write_csv(csv_path.as_deref(), stdout, |w| output::write_trajectory(w, &report.trajectory, stride))?
        }
        RunOutput::Sir(report) => {
            write_csv(csv_path.as_deref(), stdout, |w| output::write_sir(w, report, stride))?;
            if let Some(path) = diagnostics.or_else(|| out.diagnostics.clone()) {
                write_csv(Some(&path), stdout, |w| output::write_sir_diagnostics(w, report, stride))?;
            }
        }
    }

    let line = summary(&result, loaded.config.solver.norm.value(), runtime);
    // Keep stdout a clean CSV when the solution is streamed there.
    let sink: &mut dyn Write = if csv_path.is_some() { stdout } else { stderr };
    writeln!(sink, "{line}").map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

/// `status=… final_norm=… runtime=…s windows=… max_contraction=… residual=…`.
pub fn summary(result: &RunOutput, p: f64, runtime: f64) -> String {
    let report = result.report();
    let norm = varfrac::NormExponent::new(p).expect("validated norm");
    let status = match report.status {
        Status::Completed => "status=completed".to_string(),
        Status::BlowUp { omega_estimate, trigger } => format!(
            "status=blow-up omega_est={} trigger={}",
            output::float(omega_estimate),
            match trigger {
                BlowUpTrigger::ThresholdCrossed => "threshold",
                BlowUpTrigger::StepsExhausted => "steps-exhausted",
            }
        ),
    };
    format!(
        "{status} final_norm={} runtime={runtime:.3}s windows={} max_contraction={:.4} residual={:.3e}",
        output::float(report.final_norm(norm)),
        report.per_window.len(),
        report.max_contraction(),
        report.residual
    )
}
