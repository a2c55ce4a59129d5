//! `pathmetric` command line: consistency checks, Δ brackets, metricity,
//! certificate verification, generators, elimination and the scaling
//! experiment. Results go to stdout as JSON (or CSV with `--csv`),
//! diagnostics to stderr.
//!
//! Exit codes: 0 success (an infeasible or inconsistent answer is still
//! success), 2 invalid input, 3 resource cap.

mod commands;
mod input;
mod output;
pub mod scaling;

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand};

pub use scaling::{run_scaling_experiment, ExperimentRow, ScalingConfig};

#[derive(Debug, Parser)]
#[command(name = "pathmetric", version, about = "Metricity of consistent path systems")]
pub struct Cli {
    /// Emit CSV instead of JSON.
    #[arg(long, global = true)]
    pub csv: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a path system (pathsys/v1 or pathsys-invariant/v1).
    Check { file: String },
    /// Bracket Δ by bisection.
    Delta(DeltaArgs),
    /// Decide whether some metric makes every path a geodesic.
    IsMetric {
        file: String,
        #[arg(long)]
        invariant: bool,
    },
    /// Verify a metric-cert/v1 certificate against a system.
    Verify { system: String, cert: String },
    /// Generate a system.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Expand an invariant system to pathsys/v1.
    Expand { file: String },
    /// Fourier–Motzkin elimination of an lp/v1 file.
    Fm(FmArgs),
    /// Run the Cayley scaling experiment.
    Scaling {
        #[arg(long)]
        config: String,
    },
}

#[derive(Debug, Args)]
pub struct DeltaArgs {
    pub file: String,
    /// Use the invariance-reduced LP (requires a pathsys-invariant/v1 file).
    #[arg(long)]
    pub invariant: bool,
    #[arg(long, default_value = "1e-6")]
    pub tol: String,
    #[arg(long)]
    pub float_prepass: bool,
    /// Also write the certificate at `hi` to this file.
    #[arg(long)]
    pub cert_out: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// The Petersen system (pathsys/v1).
    Petersen,
    /// The Paley system on `p` points (pathsys-invariant/v1).
    Paley {
        #[arg(long)]
        p: usize,
    },
    /// The Cayley lower-bound construction.
    Cayley {
        #[arg(long)]
        n: usize,
        /// Generators, comma separated; negatives are added.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long)]
        m: usize,
        /// Write the word table alone to this file.
        #[arg(long)]
        out: Option<String>,
    },
    /// Sample a generator set and build the construction from it.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        max_attempts: usize,
        #[arg(long)]
        out: Option<String>,
    },
    /// The ten-row reduced subsystem of the Paley system on 29 points (lp/v1).
    Paley29Subsystem,
}

#[derive(Debug, Args)]
pub struct FmArgs {
    pub file: String,
    /// Parameter interval `a,b` (closed) for systems with `t`.
    #[arg(long)]
    pub param_interval: Option<String>,
    /// Variables to eliminate, in order, comma separated.
    #[arg(long)]
    pub order: Option<String>,
    /// Variables to keep, comma separated.
    #[arg(long)]
    pub keep: Option<String>,
}

/// Failure mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Cap(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Cap(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Cap(m) => m,
        }
    }
}

/// Runs `argv` (program name first) against the process streams.
pub fn execute<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    execute_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn execute_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match commands::run(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.code()
        }
    }
}
