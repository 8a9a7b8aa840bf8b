use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use lpor_core::experiment::{run_experiment, run_experiment_traced, run_plan};
use lpor_core::metrics::write_csv;
use lpor_core::{parse_config, render_config, Protocol, ScenarioConfig};

#[derive(Parser)]
#[command(name = "lpor", version, about = "L-POR / POR mobile ad-hoc routing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (protocol, speed, seed) combination and emit one CSV row each.
    Run(RunArgs),
    /// Print the effective configuration (defaults plus file and flags).
    Config(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Configuration file (flat `key = value` TOML).
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nodes: Option<usize>,
    /// Node speed in m/s; repeat for a sweep.
    #[arg(long)]
    speed: Vec<f64>,
    /// RNG seed; repeat for several runs per cell.
    #[arg(long)]
    seed: Vec<u64>,
    /// `lpor` or `por`; repeat to compare.
    #[arg(long)]
    protocol: Vec<Protocol>,
    /// Simulated seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// CSV output file (default: standard output).
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Directory for one trace file per run.
    #[arg(long)]
    trace: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                parse_config(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => ScenarioConfig::default(),
        };
        if let Some(n) = self.nodes {
            cfg.nodes = n;
        }
        if !self.speed.is_empty() {
            cfg.speeds.clone_from(&self.speed);
        }
        if !self.seed.is_empty() {
            cfg.seeds.clone_from(&self.seed);
        }
        if !self.protocol.is_empty() {
            cfg.protocols.clone_from(&self.protocol);
        }
        if let Some(d) = self.duration {
            cfg.sim_time = d;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(args: &RunArgs) -> Result<()> {
    let cfg = args.load()?;
    let rows = match &args.trace {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let runs = run_experiment_traced(&cfg)?;
            for ((protocol, speed, seed), (_, trace)) in run_plan(&cfg).into_iter().zip(&runs) {
                let path = dir.join(format!("trace_{protocol}_{speed}_{seed}.log"));
                fs::write(&path, trace).with_context(|| format!("writing {}", path.display()))?;
            }
            runs.into_iter().map(|(row, _)| row).collect()
        }
        None => run_experiment(&cfg)?,
    };
    match &args.out {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&rows, file)?;
        }
        None => write_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(args) => run(args),
        Command::Config(args) => {
            let cfg = args.load()?;
            io::stdout().write_all(render_config(&cfg).as_bytes())?;
            Ok(())
        }
    }
}
