//! `mhessian`: evaluate m-traces, solve Hessian equations and run the
//! inequality suites from the command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
//! 3 boundary convexity refusal, 4 solver divergence.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mhessian::Error;

use config::RunFlags;

#[derive(Debug, Parser)]
#[command(name = "mhessian", version, about = "m-Hessian operators, Hessian integrals and sharp inequality checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// m-traces, gradient and cone verdict of a symmetric matrix
    Trace {
        /// JSON array of rows, or @file containing one
        matrix: String,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Solve T_m[w] = psi T_l[w] with zero boundary data
    Solve(RunFlags),
    /// Run an inequality suite ("all", "maclaurin" or a check name)
    Verify {
        suite: String,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// CSV columns from a solution or report file
    Plotdata {
        input: PathBuf,
        /// Output file (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::ConvexityGate { .. } => 3,
        Error::Convergence { .. } | Error::ConeExit { .. } => 4,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Trace { matrix, m } => commands::trace(&matrix, m),
        Command::Solve(flags) => commands::solve(&flags.resolve(0)?),
        Command::Verify { suite, flags } => commands::verify(&suite, &flags.resolve(100)?),
        Command::Plotdata { input, out } => commands::plotdata(&input, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
