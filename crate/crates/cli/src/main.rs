mod commands;
mod config;
mod output;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use budget_match::choice::ChoiceKind;
use budget_match::engine::Engine;
use budget_match::model::Rat;
use budget_match::verify::{BudgetProfile, Property};

/// Exit statuses shared by every command.
pub mod exit {
    pub const OK: u8 = 0;
    pub const WITNESS: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const GUARD: u8 = 3;
}

#[derive(Parser)]
#[command(name = "budget-match", version, about = "Deferred acceptance under hospital budgets: solve, verify, probe")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
pub struct GlobalOpts {
    /// Largest input accepted by the exact knapsack choice.
    #[arg(long, global = true, default_value_t = 22)]
    pub oracle_cap: usize,
    /// Largest number of candidate matchings an existence search may enumerate.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    pub enum_cap: u128,
    /// Largest number of contracts per doctor for misreport enumeration.
    #[arg(long, global = true, default_value_t = 5)]
    pub misreport_cap: usize,
    /// Largest per-hospital pool scanned for blocking coalitions.
    #[arg(long, global = true, default_value_t = 20)]
    pub pool_cap: usize,
    /// Largest hospital universe for property enumeration.
    #[arg(long, global = true, default_value_t = 12)]
    pub property_cap: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Print rationals as rounded decimals instead of exact fractions.
    #[arg(long, global = true)]
    pub decimal: bool,
    /// Include the round-by-round trace.
    #[arg(long, global = true)]
    pub trace: bool,
    /// TOML file whose keys override these flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Input {
    /// Market JSON file.
    #[arg(long, conflicts_with = "fixture")]
    pub market: Option<PathBuf>,
    /// Built-in example market.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Choice function at every hospital; defaults to the market's own.
    #[arg(long)]
    pub mechanism: Option<ChoiceKind>,
    #[arg(long)]
    pub engine: Option<Engine>,
}

#[derive(Subcommand)]
enum Command {
    /// Run deferred acceptance and report the matching and budget use.
    Solve {
        #[command(flatten)]
        input: Input,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a matching for blocking coalitions.
    Verify {
        #[command(flatten)]
        input: Input,
        /// Matching JSON (a bare matching or a `solve` report); solves when omitted.
        #[arg(long)]
        matching: Option<PathBuf>,
        /// implied, given, x<factor>, or a comma-separated list.
        #[arg(long, default_value = "implied")]
        budgets: BudgetProfile,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Enumerate substitutes, IRC, LAD and COM for hospital choice functions.
    Props {
        #[command(flatten)]
        input: Input,
        /// Hospital name; all hospitals when omitted.
        #[arg(long)]
        hospital: Option<String>,
        /// Properties to check; all when omitted.
        #[arg(long, value_delimiter = ',')]
        property: Vec<Property>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Search for a profitable preference misreport.
    ProbeSp {
        #[command(flatten)]
        input: Input,
        /// Doctor name; all doctors when omitted.
        #[arg(long)]
        doctor: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide whether any stable matching exists.
    Exists {
        #[command(flatten)]
        input: Input,
        /// Budgets to check: given, x<factor>, or a list.
        #[arg(long, default_value = "given")]
        budgets: BudgetProfile,
        /// Upper budgets: look for a matching stable under some budgets between
        /// the market's and these.
        #[arg(long)]
        inflate: Option<BudgetProfile>,
        /// Stop after this many seconds; lifts the enumeration cap.
        #[arg(long)]
        deadline_secs: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a market.
    Gen {
        #[arg(long)]
        family: Family,
        #[command(flatten)]
        params: FamilyArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run mechanisms over many random markets and write CSV.
    Sweep {
        /// Number of seeds, starting at --seed.
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        /// Mechanisms to run; every compatible non-exact one when omitted.
        #[arg(long, value_delimiter = ',')]
        mechanisms: Vec<ChoiceKind>,
        #[arg(long)]
        engine: Option<Engine>,
        /// Worker threads; all cores when omitted.
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        random: RandomArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Family {
    Theorem1,
    Theorem4,
    Random,
}

#[derive(Args, Debug)]
pub struct FamilyArgs {
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    #[arg(long, default_value = "1/10")]
    pub alpha: Rat,
    #[arg(long, default_value = "1/2")]
    pub beta: Rat,
    #[arg(long, default_value = "1")]
    pub w_low: Rat,
    #[arg(long, default_value = "3")]
    pub w_high: Rat,
    #[arg(long, default_value = "4")]
    pub budget: Rat,
    #[command(flatten)]
    pub random: RandomArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Utility {
    General,
    Proportional,
    Uniform,
}

#[derive(Args, Debug, Clone)]
pub struct RandomArgs {
    #[arg(long)]
    pub doctors: Option<usize>,
    #[arg(long)]
    pub hospitals: Option<usize>,
    #[arg(long)]
    pub min_contracts: Option<usize>,
    #[arg(long)]
    pub max_contracts: Option<usize>,
    #[arg(long)]
    pub max_per_hospital: Option<usize>,
    #[arg(long)]
    pub wage_min: Option<Rat>,
    #[arg(long)]
    pub wage_max: Option<Rat>,
    #[arg(long)]
    pub budget_max: Option<Rat>,
    #[arg(long)]
    pub max_denominator: Option<i128>,
    #[arg(long)]
    pub utility: Option<Utility>,
    /// Allow equal ranking keys within a hospital.
    #[arg(long)]
    pub allow_ties: bool,
    /// Chance that a doctor's list is truncated.
    #[arg(long)]
    pub truncate: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let guard = e.chain().any(|c| {
                matches!(c.downcast_ref::<budget_match::Error>(), Some(budget_match::Error::NonTermination(_)))
            });
            ExitCode::from(if guard { exit::GUARD } else { exit::INPUT })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let s = config::Settings::load(&cli.global)?;
    match cli.command {
        Command::Solve { input, output } => commands::solve(&s, &input, output.as_deref()),
        Command::Verify { input, matching, budgets, output } => {
            commands::verify(&s, &input, matching.as_deref(), &budgets, output.as_deref())
        }
        Command::Props { input, hospital, property, output } => {
            commands::props(&s, &input, hospital.as_deref(), &property, output.as_deref())
        }
        Command::ProbeSp { input, doctor, output } => {
            commands::probe_sp(&s, &input, doctor.as_deref(), output.as_deref())
        }
        Command::Exists { input, budgets, inflate, deadline_secs, output } => {
            commands::exists(&s, &input, &budgets, inflate.as_ref(), deadline_secs, output.as_deref())
        }
        Command::Gen { family, params, output } => commands::gen(&s, family, &params, output.as_deref()),
        Command::Sweep { seeds, mechanisms, engine, threads, random, output } => {
            sweep::run(&s, seeds, &mechanisms, engine, threads, &random, output.as_deref())
        }
    }
}
