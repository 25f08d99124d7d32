//! Command-line front end for `hole-lab`.
//!
//! Exit codes are a stable contract: `0` success, `1` a verification or
//! assertion failure, `2` a usage or capacity error.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod chart;
pub mod commands;
pub mod config;
pub mod record;

use record::{OutDir, ResultRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad arguments, capacity limits, unreadable inputs.
    Usage(String),
    /// An identity or assertion did not hold.
    Failed(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failed(_) => EXIT_FAILED,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Failed(m) => write!(f, "failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<hole_lab::Error> for CliError {
    fn from(e: hole_lab::Error) -> Self {
        use hole_lab::Error as E;
        match e {
            E::InvalidArgument(_) | E::Capacity { .. } => CliError::Usage(e.to_string()),
            E::NonConvergence { .. } | E::Verification(_) | E::FitRefused { .. } => {
                CliError::Failed(e.to_string())
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hole-lab",
    version,
    about = "Hole probabilities of SU(m+1) Gaussian random polynomials"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Flat `key = value` file, or a JSON record whose config echo is reused.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Artifact directory for records, campaign CSV and plot data.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print the JSON record instead of the table.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the exact-identity suites.
    Verify(commands::verify::VerifyArgs),
    /// Asymptotic rate constants and lattice sums.
    Rates(commands::rates::RatesArgs),
    /// One Monte Carlo estimate.
    Simulate(commands::simulate::SimulateArgs),
    /// Estimates over a list of degrees and a line fit of −log p̂ against N^{m+1}.
    Sweep(commands::sweep::SweepArgs),
    /// Merge campaign CSV files into one fit.
    Report(commands::sweep::ReportArgs),
}

/// What a command produced; `failure` turns into exit code 1 after
/// everything has been written.
pub struct Outcome {
    pub record: ResultRecord,
    pub table: String,
    pub files: Vec<(String, String)>,
    pub failure: Option<String>,
}

impl Outcome {
    pub fn ok(record: ResultRecord, table: String) -> Self {
        Outcome {
            record,
            table,
            files: Vec::new(),
            failure: None,
        }
    }
}

/// Parses `args` (program name first) and runs the command, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("hole-lab: {e}");
            e.code()
        }
    }
}

fn execute(command: Command) -> Result<i32, CliError> {
    let (common, name) = match &command {
        Command::Verify(a) => (a.common.clone(), "verify"),
        Command::Rates(a) => (a.common.clone(), "rates"),
        Command::Simulate(a) => (a.common.clone(), "simulate"),
        Command::Sweep(a) => (a.common.clone(), "sweep"),
        Command::Report(a) => (a.common.clone(), "report"),
    };
    let file = match &common.config {
        Some(p) => config::FileConfig::load(p)?,
        None => config::FileConfig::default(),
    };
    file.check_command(name)?;
    let out = OutDir::new(common.out.clone())?;
    let outcome = match command {
        Command::Verify(a) => commands::verify::run(&a, &file)?,
        Command::Rates(a) => commands::rates::run(&a, &file)?,
        Command::Simulate(a) => commands::simulate::run(&a, &file, &out)?,
        Command::Sweep(a) => commands::sweep::run(&a, &file, &out)?,
        Command::Report(a) => commands::sweep::report(&a, &file)?,
    };
    out.write(&format!("{name}.json"), &outcome.record.to_json())?;
    for (file_name, contents) in &outcome.files {
        out.write(file_name, contents)?;
    }
    if common.json {
        println!("{}", outcome.record.to_json());
    } else {
        print!("{}", outcome.table);
    }
    match outcome.failure {
        Some(msg) => {
            eprintln!("hole-lab: failed: {msg}");
            Ok(EXIT_FAILED)
        }
        None => Ok(EXIT_OK),
    }
}
