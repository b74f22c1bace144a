use std::path::PathBuf;

use memcap::signal::io::{write_measurement_trace, write_segments, write_waveform};
use memcap::signal::{synthesize_cycle, synthesize_waveform, WaveformKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{num, reset_dir, write_csv};
use crate::config::PipelineConfig;
use crate::error::CliResult;
use crate::layout::Layout;
use crate::seed::{stage_seed, Stage};

/// Drive waveforms, the composite cycle, and one measurement-frame trace
/// per cycle of the synthetic SET-amplitude sweep.
pub fn synth(cfg: &PipelineConfig) -> CliResult<Vec<PathBuf>> {
    let seed = stage_seed(cfg.require_seed()?, Stage::Synth);
    let layout = Layout::new(&cfg.out_dir);
    let fs = cfg.acquisition.sample_rate;
    let dir = layout.synth();
    let mut out = Vec::new();

    for (name, kind) in [("read", WaveformKind::Read), ("set", WaveformKind::Set), ("reset", WaveformKind::Reset)] {
        let v = synthesize_waveform(kind, &cfg.schedule, fs)?;
        let t: Vec<f64> = (0..v.len()).map(|k| k as f64 / fs).collect();
        let p = dir.join("waveforms").join(format!("{name}.csv"));
        write_waveform(&p, &t, &v)?;
        out.push(p);
    }
    let cycle = synthesize_cycle(&cfg.schedule, fs)?;
    let p = dir.join("cycle.csv");
    write_waveform(&p, &cycle.t, &cycle.v)?;
    out.push(p);
    let p = dir.join("cycle_segments.csv");
    write_segments(&p, &cycle.segments)?;
    out.push(p);

    let truth = cfg.fixed_energy_model();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cycles = cfg.experiment.synthesize(&cfg.schedule, fs, &cfg.device, &truth, &mut rng)?;
    let width = cycles.len().to_string().len().max(3);
    let cycle_dir = layout.synth_cycles();
    reset_dir(&cycle_dir)?;
    for (k, c) in cycles.iter().enumerate() {
        let p = cycle_dir.join(format!("cycle_{k:0width$}.csv"));
        write_measurement_trace(&p, &c.trace.to_records(&cfg.device))?;
        out.push(p);
    }
    let p = dir.join("truth.csv");
    write_csv(
        &p,
        "cycle,amplitude_v,repeat,r_target_ohms,set_energy_j",
        cycles
            .iter()
            .enumerate()
            .map(|(k, c)| format!("{k},{},{},{},{}", num(c.amplitude), c.repeat, num(c.r_target), num(c.set_energy))),
    )?;
    out.push(p);
    log::info!("synth: {} cycles at {} Hz", cycles.len(), fs);
    Ok(out)
}
