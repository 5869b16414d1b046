//! `ktri`: fixture-driven checks, harnesses and extraction traces for
//! k-triangular set functions.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "ktri", version, about = "Exact checks for k-triangular lattice-valued set functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value = "table", global = true)]
    format: Format,
    /// Seed for sampled index maps and chains.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// k-triangularity, monotonicity and minimal k of a function or of every family member.
    Check {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long, default_value = "1")]
        k: String,
        #[command(flatten)]
        common: Common,
    },
    /// Full semivariation table with maximizing subsets.
    Semivar {
        #[arg(long)]
        fixture: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Hypotheses and conclusions of a convergence theorem on a family.
    Harness {
        #[arg(long)]
        fixture: PathBuf,
        /// BJ, N, VHS or S.
        #[arg(long)]
        theorem: String,
        #[arg(long, default_value = "1")]
        k: String,
        /// JSON file with sequences, chains and submeasure; defaults to singletons and tail chains.
        #[arg(long)]
        inputs: Option<PathBuf>,
        /// Random index maps sampled on top of constants and staircases.
        #[arg(long, default_value_t = 200)]
        horizon_phis: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Extract a subsequence along which the semivariation is certified to decay.
    Drewnowski {
        /// Weight rule, e.g. "alternating-power 2", "geometric 1/2", "zero".
        #[arg(long, default_value = "alternating-power 2")]
        weights: String,
        /// Disjoint sequence rule: "singletons", "intervals W" or "multiples F".
        #[arg(long, default_value = "singletons")]
        sequence: String,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Comma-separated targets b_1,…,b_L; derived from the tail regulator when absent.
        #[arg(long, value_delimiter = ',')]
        targets: Option<Vec<String>>,
        /// Chain depth for the restricted-continuity check.
        #[arg(long)]
        horizon_depth: Option<usize>,
        /// Sub-blocks tried per level.
        #[arg(long, default_value_t = 64)]
        horizon_width: u32,
        /// Random unions of suffixes checked.
        #[arg(long, default_value_t = 32)]
        horizon_samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Exhaustive sup_E |m_j(E) - m_0(E)| for every member.
    SchurGap {
        #[arg(long)]
        fixture: PathBuf,
        /// Atoms swept; must equal the family's ground set size.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Verify checksums, regeneration and expected values of the fixture corpus.
    CorpusVerify {
        #[arg(long, default_value = "fixtures")]
        dir: PathBuf,
        /// Rewrite the corpus from the builtin descriptors first.
        #[arg(long)]
        regenerate: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::EXIT_INPUT)
        }
    }
}
