use std::ops::Range;
use std::path::PathBuf;
use std::process::ExitCode;

use alp_core::harness::{self, ExperimentConfig, Verdict};
use clap::{Parser, Subcommand};

/// Acting-and-learning experiments on the simulated robot world.
#[derive(Parser)]
#[command(name = "alp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its reports.
    Run { config: PathBuf },
    /// Re-run an experiment and compare it with a recorded trace.
    Replay { trace: PathBuf, config: PathBuf },
    /// Print the domains, constraints, rules and perception tables of a model file.
    Inspect {
        model: PathBuf,
        /// Show the model the learner would start from with no prior knowledge.
        #[arg(long)]
        from_scratch: bool,
    },
    /// Run an experiment for each seed in a half-open range such as `0..10`.
    Sweep {
        config: PathBuf,
        #[arg(long, value_parser = parse_range)]
        seeds: Range<u64>,
    },
}

fn parse_range(s: &str) -> Result<Range<u64>, String> {
    let (a, b) = s.split_once("..").ok_or("expected a range like 0..10")?;
    let a: u64 = a.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
    if a >= b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok(a..b)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> alp_core::Result<ExitCode> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::read(&config)?;
            let out = harness::run_experiment(&cfg)?;
            let dir = cfg.resolved_output_dir();
            for path in harness::write_reports(&cfg, &out, &dir)? {
                println!("wrote {}", path.display());
            }
            println!("{}", serde_json::to_string_pretty(&out.metrics).expect("metrics serialize"));
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { trace, config } => {
            let recorded = harness::read_trace(&trace)?;
            let cfg = ExperimentConfig::read(&config)?;
            let verdict = harness::replay(&recorded, &cfg)?;
            println!("{verdict}");
            Ok(if verdict == Verdict::Identical {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Inspect { model, from_scratch } => {
            let loaded = harness::load_model(&model, from_scratch)?;
            print!("{}", harness::describe(&loaded));
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, seeds } => {
            let cfg = ExperimentConfig::read(&config)?;
            let rows = harness::sweep(&cfg, seeds)?;
            print!("{}", harness::sweep_csv(&rows));
            Ok(ExitCode::SUCCESS)
        }
    }
}
