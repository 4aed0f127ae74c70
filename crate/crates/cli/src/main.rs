mod args;
mod commands;
mod surface;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, FieldCommand};

/// Environment variable capping the worker count.
const THREADS_ENV: &str = "AREABOUND_THREADS";

#[derive(Debug)]
pub enum Failure {
    /// Bad flags or flag combinations.
    Usage(String),
    /// The instance violates a hypothesis, or the input is malformed.
    Instance(areabound::Error),
    /// A numerical procedure broke down.
    Numeric(areabound::Error),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Instance(e) => write!(f, "error: {e}"),
            Failure::Numeric(e) => write!(f, "check failed: {e}"),
        }
    }
}

impl From<areabound::Error> for Failure {
    fn from(e: areabound::Error) -> Self {
        match e {
            areabound::Error::SolverDegenerate { .. } => Failure::Numeric(e),
            _ => Failure::Instance(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Instance(e.into())
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

/// `Ok(true)` when every check passed.
fn run(cli: Cli) -> Result<bool, Failure> {
    configure_threads()?;
    match cli.command {
        Command::Field(FieldCommand::Eval(c)) => commands::field_eval(&c),
        Command::Field(FieldCommand::Fuzz(c)) => commands::field_fuzz(&c),
        Command::Surface(c) => commands::surface(&c),
        Command::Solve(c) => commands::solve(&c),
        Command::Verify(c) => commands::verify(&c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f @ Failure::Numeric(_)) => {
            eprintln!("{f}");
            ExitCode::from(1)
        }
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(2)
        }
    }
}
