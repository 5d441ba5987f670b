//! `gibbslab` — mixing entropies, microstate counting and demon work
//! measurements from the command line.
//!
//! Every subcommand prints one report to stdout (`--format json|csv`).
//! Failures print a single-line JSON error record and exit nonzero; the
//! exit status is 0 exactly when no error record was emitted. The demon
//! and orthogonality runs write their outputs plus a run manifest into the
//! output directory (`--out`, else `GIBBSLAB_OUT`, else the working
//! directory); `rerun` re-executes a manifest and verifies the outputs
//! byte for byte via their checksum.

mod commands;
mod config;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use output::{CliError, OutputFormat};

const OUTPUT_SCHEMA: &str = include_str!("../schema/output.schema.json");

#[derive(Parser)]
#[command(
    name = "gibbslab",
    version,
    about = "An entropy-of-mixing laboratory for ideal gases"
)]
struct Cli {
    /// Report format printed to stdout
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Microstate count of N particles over X one-particle states
    Count {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        x: u64,
        /// distinguishable | corrected-boltzmann | bose | fermi
        #[arg(long)]
        convention: String,
    },
    /// Partition-removal entropy for a scenario file
    Mix {
        /// Key-value scenario file (see README for the schema)
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Mix and demon-un-mix a tagged gas, measuring the work
    Demon {
        /// Key-value run configuration
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed from the config file; generated if absent
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for ledgers, summary and manifest
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Small-Hilbert-space demonstrations
    Quantum {
        #[command(subcommand)]
        task: QuantumTask,
    },
    /// Re-execute a stochastic run from its manifest and verify the outputs
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the JSON schema that all reports validate against
    Schema,
}

#[derive(Subcommand)]
enum QuantumTask {
    /// Exhaustively count many-particle states (N <= 6, X <= 8)
    Enumerate {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        x: usize,
        /// bose | fermi | distinguishable
        #[arg(long)]
        statistics: String,
    },
    /// Per-compartment vs total-state symmetrization counting
    Bookkeeping {
        /// Particles per side
        #[arg(long)]
        n: u64,
        /// One-particle states per side
        #[arg(long)]
        x: u64,
    },
    /// Reduced density matrix of the antisymmetrized two-fermion state
    ReducedDm {
        #[arg(long, default_value_t = 2)]
        modes: usize,
    },
    /// Orthogonality drift under repeated random unitary evolution
    Orthogonality {
        #[arg(long, default_value_t = 8)]
        modes: usize,
        #[arg(long, default_value_t = 1000)]
        steps: u32,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(command: Command) -> Result<serde_json::Value, CliError> {
    match command {
        Command::Count { n, x, convention } => commands::cmd_count(n, x, &convention),
        Command::Mix { scenario } => commands::cmd_mix(&scenario),
        Command::Demon { config, seed, out } => commands::cmd_demon(&config, seed, out),
        Command::Quantum { task } => match task {
            QuantumTask::Enumerate { n, x, statistics } => {
                commands::cmd_quantum_enumerate(n, x, &statistics)
            }
            QuantumTask::Bookkeeping { n, x } => commands::cmd_quantum_bookkeeping(n, x),
            QuantumTask::ReducedDm { modes } => commands::cmd_quantum_reduced_dm(modes),
            QuantumTask::Orthogonality {
                modes,
                steps,
                seed,
                out,
            } => commands::cmd_quantum_orthogonality(modes, steps, seed, out),
        },
        Command::Rerun { manifest, out } => commands::cmd_rerun(&manifest, out),
        Command::Schema => Ok(serde_json::from_str(OUTPUT_SCHEMA).expect("schema is valid JSON")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(report) => {
            print!("{}", output::render(&report, cli.format));
            ExitCode::SUCCESS
        }
        Err(error) => {
            println!("{}", error.record());
            ExitCode::FAILURE
        }
    }
}
