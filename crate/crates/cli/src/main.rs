use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cbp_cli::commands;
use cbp_cli::config::RunConfig;
use cbp_cli::exit_code;
use cbp_core::Result;

/// Disparity-based Bayesian estimation for controlled branching processes.
#[derive(Parser)]
#[command(name = "cbp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed of every random stream in the run
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// JSON run configuration (flags override its fields)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Built-in dataset id: oligo-exp1 | oligo-exp2 | sim-geo45
    #[arg(long, global = true)]
    fixture: Option<String>,

    /// Disparity kind (repeatable): kl | hd | ned
    #[arg(long = "kind", global = true)]
    kinds: Vec<String>,

    /// Posterior grid size (odd)
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Importance-sampling draw count
    #[arg(long, global = true)]
    draws: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a controlled branching process tree
    Simulate,
    /// EDAP/MDAP/HPD/MDE report for a dataset or fixture
    Estimate {
        /// Tree JSON produced by `simulate`
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Influence and breakdown scans
    Robustness,
    /// Prior-sensitivity sweep
    Sensitivity,
    /// Recompute a published table and compare cell by cell
    Reproduce {
        /// table2 | table3 | table4 | table5 | table6 | sim45
        table: String,
    },
    /// Replicated simulation with estimator trends over checkpoints
    Replicate,
}

fn merged_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.fixture.is_some() {
        cfg.fixture = cli.fixture.clone();
    }
    if !cli.kinds.is_empty() {
        cfg.kinds = Some(cli.kinds.clone());
    }
    if cli.grid.is_some() {
        cfg.grid = cli.grid;
    }
    if cli.draws.is_some() {
        cfg.draws = cli.draws;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let lines = match &cli.command {
        Command::Simulate => commands::cmd_simulate(&merged_config(cli)?)?,
        Command::Estimate { data } => {
            let mut cfg = merged_config(cli)?;
            if data.is_some() {
                cfg.dataset = data.clone();
            }
            commands::cmd_estimate(&cfg)?
        }
        Command::Robustness => commands::cmd_robustness(&merged_config(cli)?)?,
        Command::Sensitivity => commands::cmd_sensitivity(&merged_config(cli)?)?,
        Command::Reproduce { table } => {
            let (lines, all_pass) = commands::cmd_reproduce(table)?;
            for line in lines {
                println!("{line}");
            }
            return Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
        Command::Replicate => commands::cmd_replicate(&merged_config(cli)?)?,
    };
    for line in lines {
        println!("{line}");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
