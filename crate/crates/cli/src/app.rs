use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, Command, ZerosOptions};
use crate::config::{parse_config, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{write_all, Artifact};

/// Open Ising chains with one thermal bath per site (ħ = k_B = h₁ = 1).
#[derive(Debug, Parser)]
#[command(name = "spinbath", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Run configuration (TOML, or JSON by extension).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "SPINBATH_OUT_DIR", default_value = "spinbath-out")]
    pub out: PathBuf,
    /// Worker threads for sweeps and scaling runs (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// RNG seed for randomized runs; overrides `[run] seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Energies, gaps and degeneracy report.
    Spectrum,
    /// Rate matrix and structural zero mask.
    Rates,
    /// Population trajectory from the configured initial state.
    Evolve,
    /// Stationary vector of each decoupled block.
    Steady,
    /// Decoupled energy subspaces as JSON.
    Blocks,
    /// P_exc(t*) over the temperature grid.
    #[command(name = "sweep-T")]
    SweepT,
    /// P_exc(t*) over the coupling grid of one site.
    SweepKappa,
    /// Counted versus predicted structural zeros of random chains.
    ZerosScaling {
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long)]
        draws: Option<usize>,
    },
    /// Data behind the thermal versus coupling-driven excitation figure.
    Fig2,
    /// The command named in `[run] command`.
    Run,
}

fn load(global: &GlobalArgs) -> Result<RunConfig> {
    let path = global.config.as_deref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = parse_config(path)?;
    if global.seed.is_some() {
        cfg.run.seed = global.seed;
    }
    Ok(cfg)
}

fn artifacts(cli: &Cli) -> Result<Vec<Artifact>> {
    let simple = |c: Command| commands::run(c, &load(&cli.global)?);
    match &cli.command {
        CliCommand::Spectrum => simple(Command::Spectrum),
        CliCommand::Rates => simple(Command::Rates),
        CliCommand::Evolve => simple(Command::Evolve),
        CliCommand::Steady => simple(Command::Steady),
        CliCommand::Blocks => simple(Command::Blocks),
        CliCommand::SweepT => simple(Command::SweepT),
        CliCommand::SweepKappa => simple(Command::SweepKappa),
        CliCommand::Fig2 => simple(Command::Fig2),
        CliCommand::ZerosScaling { max_n, draws } => {
            let cfg = cli.global.config.as_ref().map(|_| load(&cli.global)).transpose()?;
            let from_cfg = cfg.as_ref().map(|c| &c.run);
            let seed = cli
                .global
                .seed
                .or(from_cfg.and_then(|r| r.seed))
                .ok_or_else(|| CliError::Config("zeros-scaling needs --seed (or [run] seed)".into()))?;
            let opts = ZerosOptions {
                max_n: max_n.or(from_cfg.map(|r| r.zeros_max_n)).unwrap_or(4),
                draws: draws.or(from_cfg.map(|r| r.zeros_draws)).unwrap_or(100),
                seed,
            };
            commands::zeros_table(opts, cfg.as_ref().map(|c| c.hash.as_str()))
        }
        CliCommand::Run => {
            let cfg = load(&cli.global)?;
            let name = cfg.run.command.clone().ok_or_else(|| CliError::Config("[run] command is not set".into()))?;
            commands::run(name.parse()?, &cfg)
        }
    }
}

/// Runs the parsed command and writes its files. Returns the written paths.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        // Only the first call in a process can size the global pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let files = artifacts(cli)?;
    write_all(&cli.global.out, &files)?;
    Ok(files.iter().map(|a| Path::new(&cli.global.out).join(&a.name)).collect())
}
