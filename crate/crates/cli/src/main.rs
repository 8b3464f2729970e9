use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod config;

use config::{BudgetArg, PinArg, ZeroSpec};

#[derive(Debug, Parser)]
#[command(name = "padic-frames", version, about = "Build and verify tight wavelet frames on the p-adic numbers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Greedy,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FilterArg {
    Any,
    Case1,
    Case2,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for a refinable mask and write the mask document.
    Build {
        #[arg(short = 'p')]
        p: u32,
        #[arg(short = 'N')]
        n: u32,
        #[arg(short = 'M')]
        m: u32,
        /// `1,2,3`, `enumerate:<k>` or `random:<seed>`.
        #[arg(long)]
        zeros: ZeroSpec,
        /// Extra condition `λ_node = re + i·im`, as `node=re,im`.
        #[arg(long = "pin")]
        pins: Vec<PinArg>,
        #[arg(long, default_value = "mask.json")]
        out: PathBuf,
    },
    /// Search a wavelet family for a mask document.
    Frame {
        #[arg(long)]
        mask: PathBuf,
        #[arg(long, value_enum, default_value = "greedy")]
        strategy: StrategyArg,
        /// Node budget of the exhaustive search; `1000000` or `10^6`.
        #[arg(long, default_value = "10^6")]
        budget: BudgetArg,
        #[arg(long, default_value = "frame.json")]
        out: PathBuf,
    },
    /// Check frame invariants, block energies and Parseval on a seeded corpus.
    Verify {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long, default_value_t = 20)]
        corpus_size: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "verify.json")]
        out: PathBuf,
    },
    /// Compare measured remainders with the approximation bounds.
    Approx {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long, default_value_t = 20)]
        corpus_size: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Power weight exponents; defaults to 1 and 2.
        #[arg(long = "m")]
        powers: Vec<u32>,
        /// Log weight parameters; defaults to 0.5 and 1.
        #[arg(long = "eps")]
        epsilons: Vec<f64>,
        /// Largest cutoff Ñ; defaults to M + l + 2.
        #[arg(long)]
        max_cutoff: Option<i32>,
        /// Skip the frame validation precondition.
        #[arg(long)]
        force: bool,
        #[arg(long, default_value = "approx.csv")]
        csv: PathBuf,
        #[arg(long, default_value = "approx.json")]
        json: PathBuf,
    },
    /// List covering zero sets as JSON.
    EnumerateTrees {
        #[arg(short = 'p')]
        p: u32,
        #[arg(short = 'N')]
        n: u32,
        #[arg(short = 'M')]
        m: u32,
        #[arg(long, default_value_t = 100)]
        max: usize,
        #[arg(long, value_enum, default_value = "any")]
        filter: FilterArg,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), commands::CliError> {
    match cli.command {
        Command::Build {
            p,
            n,
            m,
            zeros,
            pins,
            out,
        } => commands::build(p, n, m, &zeros, &pins, &out),
        Command::Frame {
            mask,
            strategy,
            budget,
            out,
        } => {
            let strategy = match strategy {
                StrategyArg::Greedy => padic_frames::frame::Strategy::Greedy,
                StrategyArg::Exhaustive => padic_frames::frame::Strategy::Exhaustive,
            };
            commands::frame(&mask, strategy, budget.0, &out)
        }
        Command::Verify {
            frame,
            corpus_size,
            seed,
            out,
        } => commands::verify(&frame, corpus_size, seed, &out),
        Command::Approx {
            frame,
            corpus_size,
            seed,
            powers,
            epsilons,
            max_cutoff,
            force,
            csv,
            json,
        } => commands::approx(&commands::ApproxJob {
            frame,
            corpus_size,
            seed,
            powers: if powers.is_empty() { vec![1, 2] } else { powers },
            epsilons: if epsilons.is_empty() { vec![0.5, 1.0] } else { epsilons },
            max_cutoff,
            force,
            csv,
            json,
        }),
        Command::EnumerateTrees {
            p,
            n,
            m,
            max,
            filter,
            out,
        } => {
            let filter = match filter {
                FilterArg::Any => padic_frames::mask::ZeroSetFilter::Any,
                FilterArg::Case1 => padic_frames::mask::ZeroSetFilter::Case1,
                FilterArg::Case2 => padic_frames::mask::ZeroSetFilter::Case2,
            };
            commands::enumerate_trees(p, n, m, max, filter, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 4 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
