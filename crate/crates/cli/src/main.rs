//! Command-line front end for the synthesis pipeline.
//!
//! Exit codes: 0 on success, 1 on any error, 2 on usage errors (from the
//! argument parser), 3 when `synthesize` exhausts its iteration budget
//! without satisfying every acceptance band (outputs are still written).

mod commands;
mod provenance;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::bench::BenchmarkArgs;
use commands::model::{FitArgs, SynthesizeArgs};
use commands::report::{AttackArgs, EvaluateArgs};
use commands::rules::{ClassifyArgs, ExtractRulesArgs};

/// Policy-aware synthetic tabular data.
#[derive(Parser)]
#[command(name = "polisynth", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract deontic rules from a policy document.
    ExtractRules(ExtractRulesArgs),
    /// Assign a sensitivity level to every schema attribute.
    Classify(ClassifyArgs),
    /// Fit the generative model to a real table.
    Fit(FitArgs),
    /// Sample synthetic rows and enforce the per-attribute bands.
    Synthesize(SynthesizeArgs),
    /// Score marginal fidelity and downstream utility of a synthetic table.
    Evaluate(EvaluateArgs),
    /// Simulate a privacy attack against a synthetic release.
    Attack(AttackArgs),
    /// Generate the built-in benchmark table.
    Benchmark(BenchmarkArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::ExtractRules(args) => commands::rules::extract_rules_cmd(args),
        Command::Classify(args) => commands::rules::classify_cmd(args),
        Command::Fit(args) => commands::model::fit_cmd(args),
        Command::Synthesize(args) => commands::model::synthesize_cmd(args),
        Command::Evaluate(args) => commands::report::evaluate_cmd(args),
        Command::Attack(args) => commands::report::attack_cmd(args),
        Command::Benchmark(args) => commands::bench::benchmark_cmd(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
