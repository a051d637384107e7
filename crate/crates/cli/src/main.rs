//! `quboforge`: compile MILPs to QUBO, anneal or enumerate them, run hybrid
//! Benders, and benchmark the three paths against an exact oracle.

mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "quboforge", version, about = "MILP to QUBO compiler and hybrid Benders solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile a model file to a QUBO artifact
    Compile {
        model: PathBuf,
        #[command(flatten)]
        encode: EncodeArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Solve a QUBO artifact
    Solve {
        artifact: PathBuf,
        /// Model the artifact was compiled from; enables the feasibility check
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run hybrid Benders decomposition on a model file
    Benders {
        model: PathBuf,
        #[command(flatten)]
        encode: EncodeArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        loop_args: LoopArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Benchmark every model (`.json`) and OR-Library file (`.cap`) in a directory
    Bench {
        dir: PathBuf,
        /// Comma-separated subset of direct-oracle, monolithic-qubo, hybrid-benders
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        /// Discrete bits the oracle may enumerate
        #[arg(long)]
        oracle_cap: Option<usize>,
        #[command(flatten)]
        encode: EncodeArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        loop_args: LoopArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Write a seeded benchmark instance as a model file
    Generate {
        /// knapsack, max_clique, mis, cflp or tsp_mtz
        problem: String,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct EncodeArgs {
    /// Total bit budget, slack included
    #[arg(long)]
    budget: Option<usize>,
    /// Bits per continuous variable
    #[arg(long, default_value_t = quboforge::binarize::DEFAULT_CONTINUOUS_BITS)]
    continuous_bits: usize,
    /// Penalty weight, or `auto` for the objective-range bound
    #[arg(long, default_value = "auto", allow_hyphen_values = true)]
    penalty: String,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exhaustive,
    Sa,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Exhaustive enumeration or simulated annealing
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    sweeps: usize,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
}

#[derive(Args, Debug, Clone)]
struct LoopArgs {
    /// Relative gap at which Benders stops
    #[arg(long, default_value = "0.000001", allow_hyphen_values = true)]
    tol: String,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    /// Bits of the eta grid in the QUBO master
    #[arg(long, default_value_t = 10)]
    eta_bits: usize,
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    /// Output directory, created if missing
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QUBOFORGE_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { run::EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
