use std::path::PathBuf;

use memcap::drift::io::{ingest_drift_samples, write_channel};
use memcap::drift::{channel_from_samples, ReferenceDrift};
use memcap::{estimate_channel, DriftChannelMatrix, EnergyCostModel};

use crate::config::{DriftSource, EnergySource, PipelineConfig};
use crate::error::{config, CliError, CliResult, WithContext};
use crate::layout::Layout;
use crate::seed::{delay_seed, stage_seed, Stage};

/// The cost model used for input symbol energies.
pub fn energy_model(cfg: &PipelineConfig) -> CliResult<EnergyCostModel> {
    match cfg.energy.model {
        EnergySource::Fixed => Ok(cfg.fixed_energy_model()),
        EnergySource::Fit => {
            let path = Layout::new(&cfg.out_dir).fitted_model();
            let text = std::fs::read_to_string(&path).map_err(|_| {
                config(format!(
                    "energy.model = \"fit\" but {} is missing; run fit-energy or set energy.model = \"fixed\"",
                    path.display()
                ))
            })?;
            let model: EnergyCostModel =
                serde_json::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))?;
            model.validate().context(path.display())?;
            Ok(model)
        }
    }
}

/// One channel matrix per configured delay, in configuration order.
pub fn build_channels(cfg: &PipelineConfig) -> CliResult<Vec<DriftChannelMatrix>> {
    let model = energy_model(cfg)?;
    let input = cfg.grids.input()?;
    let output = cfg.grids.output()?;
    let delays = &cfg.channel.delays;
    match cfg.drift.source {
        DriftSource::Reference => {
            let seed = stage_seed(cfg.require_seed()?, Stage::Channel);
            let sampler = ReferenceDrift::new(cfg.drift.reference)?;
            delays
                .iter()
                .map(|&d| {
                    estimate_channel(&sampler, &input, &output, d, cfg.channel.n, &model, delay_seed(seed, d))
                        .context(format!("delay {d} min"))
                })
                .collect()
        }
        DriftSource::Samples => {
            let path = cfg.paths.drift_samples.as_ref().ok_or_else(|| config("paths.drift_samples is not set"))?;
            let samples = ingest_drift_samples(path)?;
            delays
                .iter()
                .map(|&d| channel_from_samples(&samples, &input, &output, d, &model).map_err(CliError::from))
                .collect()
        }
    }
}

pub fn channel(cfg: &PipelineConfig) -> CliResult<Vec<PathBuf>> {
    let layout = Layout::new(&cfg.out_dir);
    let channels = build_channels(cfg)?;
    write_channels(&layout, &channels)
}

pub(crate) fn write_channels(layout: &Layout, channels: &[DriftChannelMatrix]) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for m in channels {
        let p = layout.channel_file(m.delay);
        write_channel(&p, m)?;
        out.push(p);
    }
    log::info!("channel: {} matrices", channels.len());
    Ok(out)
}
