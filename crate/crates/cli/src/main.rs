mod cert;
mod commands;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::{CliError, Global};

/// Exit code for malformed invocations and inputs.
const USAGE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "palinword", version, about = "Verify claims about ternary words with few palindromes and bounded repetitions")]
#[command(after_help = "Exit codes: 0 verified, 1 refuted, 2 inconclusive, 3 usage error, 4 method not applicable.")]
struct Cli {
    /// Parse and validate the inputs, then stop
    #[arg(long, global = true)]
    check_only: bool,
    /// Worker threads for searches
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Run the long variants (full cores, optimality searches)
    #[arg(long, global = true)]
    long: bool,
    /// Node budget for searches
    #[arg(long, global = true, env = "PALINWORD_BUDGET", default_value_t = palinword::avoidance::DEFAULT_BUDGET)]
    budget: u64,
    /// Also write the certificate to this file
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a morphism's freeness transfer and count palindromes in its images
    VerifyMorphism(commands::VerifyMorphismArgs),
    /// Search for a word of the target length meeting the constraints
    Backtrack(commands::BacktrackArgs),
    /// Count distinct palindromes of a word
    Census(commands::CensusArgs),
    /// Maximal exponent of a factor, with a witness
    MaxExponent(commands::MaxExponentArgs),
    /// Factors of a given length that extend to long words on both sides
    Core(commands::CoreArgs),
    /// Rauzy graph of an extendable core
    Rauzy(commands::RauzyArgs),
    /// Bispecial factors of a built-in word, or initial triplets of a morphism
    Bispecial(commands::BispecialArgs),
    /// Critical exponent from bispecial factors and their return words
    CriticalExponent(commands::CriticalExponentArgs),
    /// Run the battery for a labelled claim, or `table1` for all of them
    Reproduce {
        /// 3.a-3.f, lp.a-lp.c, 3, 5, 8, 012 or table1
        claim: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(USAGE),
            };
        }
    };
    if cli.jobs == 0 {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(USAGE);
    }
    let g = Global { check_only: cli.check_only, jobs: cli.jobs, long: cli.long, budget: cli.budget };
    let start = Instant::now();
    let result = match &cli.command {
        Command::VerifyMorphism(a) => commands::verify_morphism(a, &g),
        Command::Backtrack(a) => commands::backtrack(a, &g),
        Command::Census(a) => commands::census(a, &g),
        Command::MaxExponent(a) => commands::max_exponent_cmd(a, &g),
        Command::Core(a) => commands::core(a, &g),
        Command::Rauzy(a) => commands::rauzy(a, &g),
        Command::Bispecial(a) => commands::bispecial_cmd(a, &g),
        Command::CriticalExponent(a) => commands::critical_exponent(a, &g),
        Command::Reproduce { claim } => reproduce::reproduce(claim, &g),
    };
    match result {
        Ok(mut cert) => {
            cert.elapsed = start.elapsed();
            println!("{cert}");
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, format!("{cert}\n")) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(USAGE);
                }
            }
            ExitCode::from(cert.status.exit_code() as u8)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
        Err(CliError::Run(status, msg)) => {
            eprintln!("{}: {msg}", status.label());
            ExitCode::from(status.exit_code() as u8)
        }
    }
}
