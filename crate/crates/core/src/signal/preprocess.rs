//! One measured cycle from raw device-frame samples to a segmented trace.

use crate::error::Result;
use crate::signal::align::{align_time, correct_offset, AlignmentConfig};
use crate::signal::segment::{cycle_layout, segment_cycle, Segment};
use crate::signal::trace::VITrace;
use crate::signal::waveform::WaveformSchedule;

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessedCycle {
    pub trace: VITrace,
    pub segments: Vec<Segment>,
    /// Leading samples dropped by the alignment.
    pub discarded: usize,
    pub dv: f64,
    pub di: f64,
}

/// Aligns, offset-corrects and segments one cycle.
///
/// The retained length is the nominal cycle length of `schedule` at
/// `sample_rate`; `config.n_period` is ignored.
pub fn preprocess_cycle(
    raw: &VITrace,
    schedule: &WaveformSchedule,
    sample_rate: f64,
    config: &AlignmentConfig,
) -> Result<PreprocessedCycle> {
    let n_period = cycle_layout(schedule, sample_rate)?.last().map_or(0, |s| s.end);
    let aligned = align_time(raw, &AlignmentConfig { n_period, ..*config })?;
    let discarded = raw.t().iter().position(|&t| t == aligned.t()[0]).unwrap_or(0);
    let fixed = correct_offset(&aligned, config)?;
    let segments = segment_cycle(&fixed.trace, schedule, sample_rate)?;
    Ok(PreprocessedCycle { trace: fixed.trace, segments, discarded, dv: fixed.dv, di: fixed.di })
}
