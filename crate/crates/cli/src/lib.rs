//! `memcap` command-line tool: synthetic device traces through offset
//! correction, state estimation and energy fitting to drift channels and
//! capacity-cost curves.
//!
//! Every command reads one [`PipelineConfig`] (TOML file plus flag
//! overrides) and writes CSV files under its `out_dir`.

pub mod commands;
pub mod config;
mod error;
pub mod layout;
pub mod plot;
pub mod seed;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use config::{Overrides, PipelineConfig, CONFIG_ENV};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "memcap", version, about = "Energy-constrained storage capacity of drifting memristors")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Root seed for every stochastic step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Override a configuration value, e.g. `--set channel.n=200`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Also write SVG charts.
    #[arg(long, global = true)]
    pub plots: bool,
    /// Only print warnings and errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Synthesize drive waveforms and the synthetic SET-amplitude sweep.
    Synth,
    /// Align, offset-correct and segment cycle traces.
    Preprocess {
        /// Trace file or directory of traces.
        #[arg(long)]
        traces: Option<PathBuf>,
    },
    /// Estimate post-SET states and pair them with SET energies.
    EstimateState {
        /// Directory of preprocessed cycles.
        #[arg(long)]
        cycles: Option<PathBuf>,
    },
    /// Fit the energy cost model.
    FitEnergy {
        /// `r_ohms,e_joules` observation file.
        #[arg(long)]
        observations: Option<PathBuf>,
    },
    /// Export reference-model drift samples in the interchange format.
    DriftSimulate,
    /// Validate a drift sample interchange file.
    DriftIngest {
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Estimate the drift channel matrix for each delay.
    Channel,
    /// Compute capacity-cost curves.
    Capacity {
        /// Directory of channel matrix files; built from the drift source if absent.
        #[arg(long)]
        channels: Option<PathBuf>,
    },
    /// Run synth, preprocess, estimate-state, fit-energy, channel and capacity.
    Pipeline,
}

impl Cli {
    /// Loads the configuration with all flags applied.
    pub fn config(&self) -> CliResult<PipelineConfig> {
        let c = &self.common;
        let overrides = Overrides { seed: c.seed, out_dir: c.out_dir.clone(), plots: c.plots, set: c.set.clone() };
        let mut cfg = PipelineConfig::load(c.config.as_deref(), &overrides)?;
        let p = &mut cfg.paths;
        match &self.command {
            Command::Preprocess { traces: Some(x) } => p.traces = Some(x.clone()),
            Command::EstimateState { cycles: Some(x) } => p.cycles = Some(x.clone()),
            Command::FitEnergy { observations: Some(x) } => p.observations = Some(x.clone()),
            Command::DriftIngest { samples: Some(x) } => p.drift_samples = Some(x.clone()),
            Command::Capacity { channels: Some(x) } => p.channels = Some(x.clone()),
            _ => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs one command and returns the files it wrote.
pub fn execute(command: &Command, cfg: &PipelineConfig) -> CliResult<Vec<PathBuf>> {
    use commands::*;
    match command {
        Command::Synth => synth(cfg),
        Command::Preprocess { .. } => preprocess(cfg),
        Command::EstimateState { .. } => estimate_state(cfg),
        Command::FitEnergy { .. } => fit_energy(cfg),
        Command::DriftSimulate => drift_simulate(cfg),
        Command::DriftIngest { .. } => drift_ingest(cfg),
        Command::Channel => channel(cfg),
        Command::Capacity { .. } => capacity(cfg),
        Command::Pipeline => {
            let m = pipeline(cfg)?;
            let layout = layout::Layout::new(&cfg.out_dir);
            Ok(std::iter::once(layout.manifest()).chain(manifest_outputs(&layout, &m)).collect())
        }
    }
}

/// Entry point shared by the binary and the tests. Errors are printed to
/// stderr; the exit code is 0 on success, 1 on runtime failure and 2 on
/// invalid input.
pub fn run(cli: &Cli) -> ExitCode {
    match cli.config().and_then(|cfg| execute(&cli.command, &cfg)) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = format!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                if !msg.contains(&s.to_string()) {
                    msg.push_str(&format!("\n  caused by: {s}"));
                }
                source = s.source();
            }
            eprintln!("{msg}");
            e.into()
        }
    }
}
