//! `gapdecay` command-line runner.
//!
//! Verbs: `run`, `compare`, `sweep`, `validate`. Exit status 0 on success
//! (a FAIL in a comparison report is still success), 1 on configuration
//! errors, 2 on numerical failures.

pub mod commands;
pub mod error;
pub mod output;
pub mod spec;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::CliError;
pub use spec::RunSpec;

#[derive(Debug, Parser)]
#[command(
    name = "gapdecay",
    version,
    about = "Qubit decay in band-edge reservoirs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trajectory CSV per method plus manifest.json.
    Run(CommonArgs),
    /// Pairwise agreement report (compare.json).
    Compare(CommonArgs),
    /// Tail exponents over alpha_list x A_list (sweep.csv).
    Sweep(CommonArgs),
    /// Check the configuration and print the derived manifest.
    Validate(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Run configuration (flat key = value or JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comparison tolerance; overrides `tol` in the config.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

impl CommonArgs {
    pub fn load(&self) -> Result<RunSpec, CliError> {
        let mut spec = RunSpec::from_file(&self.config)?;
        if let Some(out) = &self.out {
            spec.out = out.clone();
        }
        if let Some(tol) = self.tol {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(CliError::Config(format!(
                    "--tol must be finite and > 0, got {tol}"
                )));
            }
            spec.tol = tol;
        }
        Ok(spec)
    }
}

fn execute(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Run(args) => {
            let spec = args.load()?;
            let outcome = commands::run(&spec)?;
            for f in &outcome.files {
                println!("wrote {}", spec.out.join(f).display());
            }
            for c in &outcome.comparisons {
                println!(
                    "{:>12} vs {:<12} common points {:>4}  max |dG| {:.3e}",
                    c.methods[0], c.methods[1], c.common_points, c.max_abs_deviation
                );
            }
        }
        Command::Compare(args) => {
            let spec = args.load()?;
            let report = commands::compare(&spec)?;
            for p in &report.pairs {
                println!(
                    "{:>12} vs {:<12} {:?} gate {:.1e}  max {:.3e}  compared {:>4}  unavailable {:>4}  {}{}",
                    p.methods[0],
                    p.methods[1],
                    p.gate,
                    p.tolerance,
                    p.max_deviation,
                    p.points_compared,
                    p.points_unavailable,
                    match p.status {
                        commands::Status::Pass => "PASS",
                        commands::Status::Fail => "FAIL",
                    },
                    if p.negative_control { " (negative control)" } else { "" }
                );
            }
            for f in &report.failures {
                match f.t {
                    Some(t) => println!("{} unavailable from t = {t}: {}", f.method, f.reason),
                    None => println!("{} unavailable: {}", f.method, f.reason),
                }
            }
            println!("wrote {}", spec.out.join("compare.json").display());
        }
        Command::Sweep(args) => {
            let spec = args.load()?;
            let rows = commands::sweep(&spec)?;
            for r in &rows {
                println!(
                    "alpha {:<6} A {:<8} fitted {:>9} predicted {:>7.3}  {}{}",
                    r.alpha,
                    r.amplitude,
                    r.fitted_exponent.map_or("-".into(), |e| format!("{e:.4}")),
                    r.predicted_exponent,
                    r.status,
                    if r.error.is_empty() {
                        String::new()
                    } else {
                        format!(" ({})", r.error)
                    }
                );
            }
            println!("wrote {}", spec.out.join("sweep.csv").display());
        }
        Command::Validate(args) => {
            let spec = args.load()?;
            let report = commands::validate(&spec)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(())
}

fn workers(cmd: &Command) -> Option<usize> {
    match cmd {
        Command::Run(a) | Command::Compare(a) | Command::Sweep(a) | Command::Validate(a) => {
            a.workers
        }
    }
}

/// Parses `args` (including the program name) and runs the verb; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match workers(&cli.command) {
        Some(0) => Err(CliError::Config("--workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))
            .and_then(|pool| pool.install(|| execute(&cli.command))),
        None => execute(&cli.command),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gapdecay: {e}");
            e.exit_code()
        }
    }
}
