mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use densetest::rational::{parse_rational, Rational};
use densetest::tester::Family;

use commands::CommandResult;

/// Build, inspect and verify dense testers over finite field towers.
#[derive(Parser)]
#[command(name = "densetest", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn class_arg(s: &str) -> Result<Family, String> {
    Family::parse(s).map_err(|e| e.to_string())
}

#[derive(Args, Clone)]
pub struct TargetArgs {
    #[arg(long)]
    pub q: u64,
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub d: usize,
    /// Failure bound as NUM/DEN.
    #[arg(long, value_parser = rational_arg)]
    pub eps: Rational,
    #[arg(long, value_parser = class_arg)]
    pub class: Family,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum RouteArg {
    Auto,
    Eval,
    Crt,
    T1,
}

#[derive(Subcommand)]
enum Command {
    /// Plan and build a tester; writes its JSON description.
    Build {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, value_enum, default_value = "auto")]
        route: RouteArg,
        /// Write the tester here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the construction plan without building anything.
    Plan {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, value_enum, default_value = "auto")]
        route: RouteArg,
    },
    /// Apply one map of a stored tester to one element.
    Entry {
        #[arg(long)]
        tester: PathBuf,
        #[arg(long)]
        index: u128,
        #[arg(long, default_value_t = 0)]
        block: usize,
        /// Prime-field coordinates of the element, low to high, comma separated.
        #[arg(long)]
        element: String,
    },
    /// Brute-force check of a stored tester.
    Verify {
        #[arg(long)]
        tester: PathBuf,
        /// Variables per block.
        #[arg(long)]
        n: usize,
        /// Enumerate everything; fails when over budget.
        #[arg(long)]
        exact: bool,
        /// Largest class and assignment sets enumerated exhaustively.
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Work budget (overrides DENSETEST_BUDGET).
        #[arg(long)]
        budget: Option<u128>,
        /// Verify against this class instead of the declared one.
        #[arg(long, value_parser = class_arg)]
        family: Option<Family>,
    },
    /// Closed-form bounds and constants.
    Bounds(commands::BoundsArgs),
    /// Irreducible polynomials.
    Irr {
        #[command(subcommand)]
        op: IrrOp,
    },
    /// Build and access timings over a sweep of t, as CSV.
    Bench {
        #[arg(long, default_value_t = 7)]
        q: u64,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, value_parser = rational_arg, default_value = "1/2")]
        eps: Rational,
        #[arg(long, value_parser = class_arg, default_value = "P")]
        class: Family,
        /// Largest t; the sweep doubles from 2.
        #[arg(long, default_value_t = 32)]
        t_max: usize,
        /// Entries timed per row.
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum IrrOp {
    /// Number of monic irreducibles of degree k.
    Count {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        k: usize,
    },
    /// The m-th irreducible of degree t from the indexed family.
    Nth {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        m: u128,
    },
    /// The first m irreducibles of degree t found by scanning.
    First {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        m: usize,
    },
}

fn run(cli: Cli) -> CommandResult {
    match cli.command {
        Command::Build { target, route, out } => commands::build(&target, route, out.as_deref()),
        Command::Plan { target, route } => commands::plan(&target, route),
        Command::Entry { tester, index, block, element } => commands::entry(&tester, index, block, &element),
        Command::Verify { tester, n, exact, cap, seed, budget, family } => {
            commands::verify(&tester, commands::VerifyOptions { n, exact, cap, seed, budget, family })
        }
        Command::Bounds(args) => commands::bounds(&args),
        Command::Irr { op } => match op {
            IrrOp::Count { q, k } => commands::irr_count(q, k),
            IrrOp::Nth { q, t, m } => commands::irr_nth(q, t, m),
            IrrOp::First { q, t, m } => commands::irr_first(q, t, m),
        },
        Command::Bench { q, d, eps, class, t_max, samples, seed } => {
            commands::bench(q, d, &eps, class, t_max, samples, seed)
        }
    }
}

fn main() -> ExitCode {
    let result = run(Cli::parse());
    result.emit()
}
