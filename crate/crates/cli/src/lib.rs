//! Config parsing, experiment commands and output writers behind the
//! `mtjsim` binary.

pub mod commands;
pub mod config;
pub mod plot;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

pub use commands::RunOptions;
pub use config::{ConfigError, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "mtjsim", version, about = "Stochastic MTJ synapse simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (TOML). Defaults to the built-in reference profile.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Overrides simulation.master_seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides simulation.n_trials.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Worker threads for Monte Carlo trials (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Skip SVG output.
    #[arg(long, global = true)]
    pub no_plot: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Deterministic temperature response to the trial waveform.
    ThermalTrace,
    /// One Monte Carlo trial with its full trace.
    Trial,
    /// Switching probability vs. spike interval.
    StdpSweep,
    /// Crossbar array driven by the configured spike schedules.
    Crossbar,
}

impl Cli {
    pub fn load_config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_path(path)?,
            None => ExperimentConfig::default_profile(),
        };
        if let Some(seed) = self.seed {
            cfg.simulation.master_seed = seed;
        }
        if let Some(n) = self.trials {
            cfg.simulation.n_trials = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Run a parsed command line; returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let cfg = cli.load_config()?;
    let opts = RunOptions {
        out_dir: cli.out_dir.clone(),
        plot: !cli.no_plot,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        anyhow::ensure!(n >= 1, "--threads must be >= 1");
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("cannot start worker pool")?;
    pool.install(|| match cli.command {
        Command::ThermalTrace => commands::cmd_thermal_trace(&cfg, &opts),
        Command::Trial => commands::cmd_trial(&cfg, &opts),
        Command::StdpSweep => commands::cmd_stdp_sweep(&cfg, &opts),
        Command::Crossbar => commands::cmd_crossbar(&cfg, &opts),
    })
}
