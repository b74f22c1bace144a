use std::path::PathBuf;

use memcap::energy::io::write_observations;
use memcap::energy::{observations_from_cycles, SegmentedCycle};
use memcap::estimate_state as estimate;
use memcap::signal::io::{read_segments, read_trace, TraceFile};
use memcap::signal::segment::gather;
use memcap::signal::SegmentKind;
use memcap::Error;

use super::{csv_inputs, num, stem, write_csv};
use crate::config::PipelineConfig;
use crate::error::{CliResult, WithContext};
use crate::layout::Layout;

/// Estimates the post-SET state of every preprocessed cycle and pairs it
/// with the SET pulse energy.
pub fn estimate_state(cfg: &PipelineConfig) -> CliResult<Vec<PathBuf>> {
    let layout = Layout::new(&cfg.out_dir);
    let input = cfg.paths.cycles.clone().unwrap_or_else(|| layout.preprocessed_cycles());
    let mut names = Vec::new();
    let mut cycles = Vec::new();
    for f in csv_inputs(&input)? {
        let trace = match read_trace(&f).context(f.display())? {
            TraceFile::Device(t) => t,
            TraceFile::Measurement(_) => {
                return Err(Error::Format { path: f, message: "expected a device-frame trace (t,v,i)".into() }.into())
            }
        };
        let seg_path = f.with_file_name(format!("{}_segments.csv", stem(&f)));
        let segments = read_segments(&seg_path).context(seg_path.display())?;
        names.push(stem(&f));
        cycles.push(SegmentedCycle { trace, segments });
    }

    let mut rows = Vec::new();
    for (name, c) in names.iter().zip(&cycles) {
        let reads = gather(&c.trace, &c.segments, |k| matches!(k, SegmentKind::ReadAfterSet(_)))?;
        let s = estimate(&reads, &cfg.device).context(name)?;
        rows.push(format!(
            "{name},{},{},{},{},{}",
            num(s.x),
            num(s.r_reported),
            num(s.variance_proxy),
            s.pairs_used,
            s.pairs_excluded
        ));
    }
    let dir = layout.estimate();
    let states = dir.join("states.csv");
    write_csv(&states, "cycle,x,r_reported_ohms,variance_proxy,pairs_used,pairs_excluded", rows)?;
    let obs = observations_from_cycles(&cycles, &cfg.device)?;
    let obs_path = layout.observations();
    write_observations(&obs_path, &obs)?;
    log::info!("estimate-state: {} cycles", cycles.len());
    Ok(vec![states, obs_path])
}
