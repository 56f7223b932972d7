// SPDX-License-Identifier: Apache-2.0

//! `hitab`: generate, apply, certify, verify and benchmark tabulation hash functions.

mod bench;
mod bound;
mod error;
mod gen;
mod hash;
mod verify;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "hitab", version, about = "High-independence tabulation hashing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a hash function and write it to a file.
    Gen(gen::GenArgs),
    /// Hash hexadecimal keys, one per line.
    Hash(hash::HashArgs),
    /// Compute a failure-probability certificate.
    Bound(bound::BoundArgs),
    /// Run brute-force and statistical verification suites.
    Verify(verify::VerifyArgs),
    /// Measure hashing throughput.
    Bench(bench::BenchArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Gen(a) => gen::run(a, &mut out),
        Command::Hash(a) => hash::run(a, &mut out),
        Command::Bound(a) => bound::run(a, &mut out),
        Command::Verify(a) => verify::run(a, &mut out),
        Command::Bench(a) => bench::run(a, &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hitab: {e}");
            e.exit_code()
        }
    }
}

fn budget() -> Result<hitab::MemoryBudget, CliError> {
    hitab::MemoryBudget::from_env().map_err(CliError::from)
}

/// Writes a line to stdout, treating a closed pipe as done.
macro_rules! outln {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(|e| $crate::error::CliError::Usage(format!("write failed: {e}")))
    };
}
pub(crate) use outln;
