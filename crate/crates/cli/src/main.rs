//! `vmdfbd`: harmonic and interharmonic detection from the command line.

mod args;
mod commands;
mod io;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Outcome;

#[derive(Debug, Parser)]
#[command(name = "vmdfbd", version, about = "VMD harmonic detection with fractal K selection")]
struct Cli {
    /// Worker threads for K sweeps and EEMD trials. Results do not depend on it.
    #[arg(long, global = true, env = "VMDFBD_THREADS", default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic or ingested signal as `t,value` CSV.
    Generate(commands::GenerateCmd),
    /// Decompose with a fixed K; modes as CSV.
    Decompose(commands::DecomposeCmd),
    /// Sweep K and report the box-dimension score of each.
    SelectK(commands::SelectKCmd),
    /// Full pipeline; JSON report.
    Detect(commands::DetectCmd),
    /// Box-counting dimension of the signal.
    Fbd(commands::FbdCmd),
    /// VMD against EMD and EEMD on known tones.
    Compare(commands::CompareCmd),
}

const EXIT_BAD_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let threads = cli.threads.max(1);
    let result = match &cli.command {
        Command::Generate(c) => commands::generate(c),
        Command::Decompose(c) => commands::decompose(c),
        Command::SelectK(c) => commands::select(c, threads),
        Command::Detect(c) => commands::detect(c, threads),
        Command::Fbd(c) => commands::fbd(c),
        Command::Compare(c) => commands::compare(c, threads),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Degenerate) => {
            eprintln!("warning: degenerate result");
            ExitCode::from(EXIT_DEGENERATE)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e
                .chain()
                .find_map(|c| c.downcast_ref::<vmdfbd::Error>())
                .is_some_and(|v| v.is_numerical());
            ExitCode::from(if numerical { EXIT_NUMERICAL } else { EXIT_BAD_INPUT })
        }
    }
}
