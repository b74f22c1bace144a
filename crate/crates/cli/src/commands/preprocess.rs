use std::path::PathBuf;

use memcap::signal::io::{read_trace, write_device_trace, write_segments, TraceFile};
use memcap::signal::{preprocess_cycle, to_vi_trace, PreprocessedCycle};
use rayon::prelude::*;

use super::{csv_inputs, num, reset_dir, stem, write_csv};
use crate::config::PipelineConfig;
use crate::error::{CliResult, WithContext};
use crate::layout::Layout;

/// Aligns, offset-corrects and segments every cycle trace. Inputs may be in
/// either the measurement or the device frame.
pub fn preprocess(cfg: &PipelineConfig) -> CliResult<Vec<PathBuf>> {
    let layout = Layout::new(&cfg.out_dir);
    let input = cfg.paths.traces.clone().unwrap_or_else(|| layout.synth_cycles());
    let files = csv_inputs(&input)?;
    let fs = cfg.acquisition.sample_rate;
    let cycles: Vec<(String, PreprocessedCycle)> = files
        .par_iter()
        .map(|f| {
            let run = || -> CliResult<PreprocessedCycle> {
                let raw = match read_trace(f)? {
                    TraceFile::Measurement(records) => to_vi_trace(&records, &cfg.device)?,
                    TraceFile::Device(trace) => trace,
                };
                Ok(preprocess_cycle(&raw, &cfg.schedule, fs, &cfg.alignment)?)
            };
            run().map(|c| (stem(f), c)).context(f.display())
        })
        .collect::<CliResult<_>>()?;

    let dir = layout.preprocessed_cycles();
    reset_dir(&dir)?;
    let mut out = Vec::new();
    for (name, c) in &cycles {
        let p = dir.join(format!("{name}.csv"));
        write_device_trace(&p, &c.trace)?;
        out.push(p);
        let p = dir.join(format!("{name}_segments.csv"));
        write_segments(&p, &c.segments)?;
        out.push(p);
    }
    let p = layout.preprocess().join("offsets.csv");
    write_csv(
        &p,
        "cycle,discarded,dv_v,di_a",
        cycles.iter().map(|(name, c)| format!("{name},{},{},{}", c.discarded, num(c.dv), num(c.di))),
    )?;
    out.push(p);
    log::info!("preprocess: {} cycles", cycles.len());
    Ok(out)
}
