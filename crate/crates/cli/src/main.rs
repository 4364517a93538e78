use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hocbf::Mode;
use hocbf_cli::{
    cmd_compare, cmd_degree, cmd_run, BarrierKind, CompareManifest, DegreeManifest, Format, Model, RunManifest,
    ScenarioSource, OUT_DIR_ENV,
};

#[derive(Parser)]
#[command(name = "hocbf", version, about = "Run HOCBF-QP scenarios for the unicycle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// Built-in scenario (`paper_sec4`, or `fuzz` for a seeded random one).
    #[arg(long)]
    scenario: Option<String>,
    /// TOML scenario file; takes precedence over --scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Clone)]
struct Output {
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    out: PathBuf,
    /// Trajectory formats to write.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv")]
    format: Vec<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario. Exit 0 safe and feasible, 1 config error,
    /// 2 infeasible steps, 3 safety violated.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        mode: Option<Mode>,
        #[command(flatten)]
        output: Output,
    },
    /// Simulate the same scenario under several modes and rank them.
    Compare {
        #[command(flatten)]
        source: Source,
        #[arg(long = "mode", value_delimiter = ',', default_value = "standard,integral,transform")]
        modes: Vec<Mode>,
        #[command(flatten)]
        output: Output,
        /// Run the modes concurrently.
        #[arg(long)]
        parallel: bool,
    },
    /// Print the relative degree set of a barrier as JSON.
    Degree {
        #[arg(long, value_enum, default_value = "unicycle")]
        model: Model,
        #[arg(long, value_enum, default_value = "obstacle")]
        barrier: BarrierKind,
        /// Highest Lie derivative order probed.
        #[arg(long, default_value_t = 5)]
        cap: usize,
        #[command(flatten)]
        source: Source,
    },
}

fn source(s: Source, mode: Option<Mode>) -> ScenarioSource {
    ScenarioSource { scenario: s.scenario, config: s.config, mode, seed: s.seed }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { source: s, mode, output } => cmd_run(&RunManifest {
            source: source(s, mode),
            out: output.out,
            formats: output.format,
        }),
        Command::Compare { source: s, modes, output, parallel } => cmd_compare(&CompareManifest {
            source: source(s, None),
            modes,
            out: output.out,
            formats: output.format,
            parallel,
        }),
        Command::Degree { model, barrier, cap, source: s } => cmd_degree(&DegreeManifest {
            source: source(s, None),
            model,
            barrier,
            cap,
        }),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
