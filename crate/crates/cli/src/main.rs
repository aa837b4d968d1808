//! `psum`: command-line front end for iterated partial summations.
//!
//! Exit codes: 0 success, 2 invalid input, 3 the requested quantity does not
//! exist (power method not applicable, degenerate normalization).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use psum_core::analysis::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use psum_core::Backend;

#[derive(Debug, Parser)]
#[command(
    name = "psum",
    version,
    about = "Iterated partial summations of finite-support distributions"
)]
pub struct Cli {
    /// Numeric backend. The PSUM_BACKEND environment variable takes precedence.
    #[arg(long, global = true, default_value = "exact")]
    backend: Backend,

    /// Convergence tolerance (max entrywise change between generations).
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,

    /// Iteration budget.
    #[arg(long = "max-iter", global = true, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,

    /// Write the main result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a parametric distribution.
    #[command(subcommand)]
    Generate(Family),
    /// Apply the partial summation k times; writes the k-th generation.
    Iterate {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        k: usize,
        /// Also write every generation as generation_<j>.json.
        #[arg(long = "out-dir")]
        out_dir: Option<PathBuf>,
        /// CSV trace: generation, vectorized entries, L1 distance to previous.
        #[arg(long = "trace-out")]
        trace_out: Option<PathBuf>,
    },
    /// Limit distribution from the dominant eigenvector of the operator.
    Limit {
        #[arg(long)]
        g: PathBuf,
        #[arg(long = "dump-operator")]
        dump_operator: Option<PathBuf>,
    },
    /// Classify the descendant sequence as converging, oscillating or undetermined.
    Classify(ClassifyArgs),
    /// Weights that leave the given distribution fixed.
    #[command(name = "derive-g")]
    DeriveG {
        #[arg(long)]
        dist: PathBuf,
    },
    /// Spectral report of the summation operator.
    Analyze {
        #[arg(long)]
        g: PathBuf,
        #[arg(long = "dump-operator")]
        dump_operator: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum Family {
    /// Bivariate inverse hypergeometric distribution.
    #[command(name = "inv-hypergeom")]
    InvHypergeom {
        #[arg(long = "N1")]
        n1: u64,
        #[arg(long = "N2")]
        n2: u64,
        #[arg(long = "N3")]
        n3: u64,
        #[arg(long)]
        k: u64,
    },
    /// Bivariate hypergeometric distribution.
    Hypergeom {
        #[arg(long = "N1")]
        n1: u64,
        #[arg(long = "N2")]
        n2: u64,
        #[arg(long = "N3")]
        n3: u64,
        #[arg(long)]
        sample: u64,
    },
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, required_unless_present = "batch", conflicts_with = "batch")]
    dist: Option<PathBuf>,
    #[arg(long, required_unless_present = "batch", conflicts_with = "batch")]
    g: Option<PathBuf>,
    /// Directory of NAME.dist.json / NAME.g.json pairs, classified in parallel.
    #[arg(long)]
    batch: Option<PathBuf>,
    #[arg(long = "trace-out", conflicts_with = "batch")]
    trace_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let mut cli = Cli::parse();
    if let Ok(value) = std::env::var("PSUM_BACKEND") {
        match value.parse() {
            Ok(backend) => cli.backend = backend,
            Err(e) => {
                eprintln!("error: PSUM_BACKEND: {e}");
                return ExitCode::from(2);
            }
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
