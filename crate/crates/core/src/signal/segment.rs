use std::fmt;
use std::ops::Range;

use crate::error::{invalid, Error, Result};
use crate::signal::trace::VITrace;
use crate::signal::waveform::{samples_per_period, WaveformKind, WaveformSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentKind {
    Reset,
    ReadAfterReset(usize),
    Set,
    ReadAfterSet(usize),
}

impl fmt::Display for SegmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SegmentKind::Reset => f.write_str("reset"),
            SegmentKind::ReadAfterReset(k) => write!(f, "read_after_reset_{k}"),
            SegmentKind::Set => f.write_str("set"),
            SegmentKind::ReadAfterSet(k) => write!(f, "read_after_set_{k}"),
        }
    }
}

impl std::str::FromStr for SegmentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let index = |rest: &str| rest.parse::<usize>().map_err(|_| invalid(format!("bad segment label '{s}'")));
        match s {
            "reset" => Ok(SegmentKind::Reset),
            "set" => Ok(SegmentKind::Set),
            _ => {
                if let Some(rest) = s.strip_prefix("read_after_reset_") {
                    Ok(SegmentKind::ReadAfterReset(index(rest)?))
                } else if let Some(rest) = s.strip_prefix("read_after_set_") {
                    Ok(SegmentKind::ReadAfterSet(index(rest)?))
                } else {
                    Err(invalid(format!("bad segment label '{s}'")))
                }
            }
        }
    }
}

/// Half-open sample range `[start, end)` belonging to one waveform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Nominal segment layout of one cycle in schedule order.
pub fn cycle_layout(schedule: &WaveformSchedule, sample_rate: f64) -> Result<Vec<Segment>> {
    let n_reset = samples_per_period(schedule.period(WaveformKind::Reset), sample_rate)?;
    let n_read = samples_per_period(schedule.period(WaveformKind::Read), sample_rate)?;
    let n_set = samples_per_period(schedule.period(WaveformKind::Set), sample_rate)?;

    let mut kinds = vec![(SegmentKind::Reset, n_reset)];
    kinds.extend((0..schedule.reads_after_reset).map(|k| (SegmentKind::ReadAfterReset(k), n_read)));
    kinds.push((SegmentKind::Set, n_set));
    kinds.extend((0..schedule.reads_after_set).map(|k| (SegmentKind::ReadAfterSet(k), n_read)));

    let mut start = 0;
    Ok(kinds
        .into_iter()
        .map(|(kind, n)| {
            let seg = Segment { kind, start, end: start + n };
            start += n;
            seg
        })
        .collect())
}

/// Splits one aligned cycle into labelled segments.
///
/// The trace must be within one sample of the nominal cycle length; the last
/// segment absorbs the difference.
pub fn segment_cycle(trace: &VITrace, schedule: &WaveformSchedule, sample_rate: f64) -> Result<Vec<Segment>> {
    schedule.validate()?;
    let mut segments = cycle_layout(schedule, sample_rate)?;
    let expected = segments.last().map_or(0, |s| s.end);
    let actual = trace.len();
    if actual.abs_diff(expected) > 1 {
        return Err(Error::LengthMismatch { expected, actual });
    }
    if let Some(last) = segments.last_mut() {
        last.end = actual;
    }
    Ok(segments)
}

/// Concatenation of every segment matching `pred`, in order.
pub fn gather(trace: &VITrace, segments: &[Segment], pred: impl Fn(&SegmentKind) -> bool) -> Result<VITrace> {
    let parts: Vec<VITrace> = segments.iter().filter(|s| pred(&s.kind)).map(|s| trace.slice(s.range())).collect();
    VITrace::concat(&parts)
}
