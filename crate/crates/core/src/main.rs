use std::path::PathBuf;

use clap::{Parser, Subcommand};
use wgqed::cli::{self, Command, Invocation};

#[derive(Parser)]
#[command(name = "wgqed", version, about = "Phonon-mediated spin networks: device figures, compilation, dynamics")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// Scenario file, or the name of a bundled scenario.
    #[arg(long, global = true, default_value = "qst_n6")]
    config: String,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default from WGQED_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Abort instead of warning when an energy-scale inequality fails.
    #[arg(long, global = true)]
    strict_hierarchy: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Rates, hierarchy report and magnitude cascade
    Device,
    /// Phonon spectrum and mode matrix
    Phonons,
    /// Sideband program for a target spin network
    Compile,
    /// Time series of a transfer scenario
    Evolve,
    /// Interferometric OTOC vs direct correlator
    Otoc,
    /// Sachdev-Ye strobe and coupling statistics
    Sy,
    /// Schema check only
    Validate,
    /// List bundled scenarios
    Scenarios,
}

fn main() {
    let args = Args::parse();
    let command = match args.command {
        Cmd::Device => Command::Device,
        Cmd::Phonons => Command::Phonons,
        Cmd::Compile => Command::Compile,
        Cmd::Evolve => Command::Evolve,
        Cmd::Otoc => Command::Otoc,
        Cmd::Sy => Command::Sy,
        Cmd::Validate => Command::Validate,
        Cmd::Scenarios => {
            for (name, _) in cli::BUNDLED {
                println!("{name}");
            }
            return;
        }
    };
    let inv = Invocation { command, config: args.config, seed: args.seed, out: args.out, threads: args.threads, strict_hierarchy: args.strict_hierarchy };
    std::process::exit(cli::run(&inv));
}
