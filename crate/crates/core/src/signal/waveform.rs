use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::signal::segment::{cycle_layout, Segment, SegmentKind};

/// Minimum number of samples per waveform period.
pub const MIN_SAMPLES_PER_PERIOD: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveformKind {
    Read,
    Set,
    Reset,
}

impl std::str::FromStr for WaveformKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "read" => Ok(Self::Read),
            "set" => Ok(Self::Set),
            "reset" => Ok(Self::Reset),
            other => Err(invalid(format!("unsupported waveform kind '{other}'"))),
        }
    }
}

/// Periods and amplitudes of one RESET-READ-SET-READ programming cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveformSchedule {
    pub t_reset: f64,
    pub t_read: f64,
    pub t_set: f64,
    pub a_set: f64,
    pub a_reset: f64,
    pub a_read: f64,
    pub reads_after_reset: usize,
    pub reads_after_set: usize,
    /// Fraction of a SET/RESET period taken by each linear edge.
    pub edge_fraction: f64,
}

impl Default for WaveformSchedule {
    fn default() -> Self {
        Self {
            t_reset: 3e-3,
            t_read: 1e-3,
            t_set: 2e-3,
            a_set: 1.0,
            a_reset: 1.0,
            a_read: 0.1,
            reads_after_reset: 2,
            reads_after_set: 3,
            edge_fraction: 0.05,
        }
    }
}

impl WaveformSchedule {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("t_reset", self.t_reset), ("t_read", self.t_read), ("t_set", self.t_set)] {
            if !(p.is_finite() && p > 0.0) {
                return Err(invalid(format!("{name} must be finite and > 0, got {p}")));
            }
        }
        for (name, a) in [("a_set", self.a_set), ("a_reset", self.a_reset), ("a_read", self.a_read)] {
            if !(a.is_finite() && a >= 0.0) {
                return Err(invalid(format!("{name} must be finite and >= 0, got {a}")));
            }
        }
        if !(self.edge_fraction > 0.0 && self.edge_fraction < 0.5) {
            return Err(invalid(format!("edge_fraction must be in (0, 0.5), got {}", self.edge_fraction)));
        }
        Ok(())
    }

    pub fn period(&self, kind: WaveformKind) -> f64 {
        match kind {
            WaveformKind::Read => self.t_read,
            WaveformKind::Set => self.t_set,
            WaveformKind::Reset => self.t_reset,
        }
    }

    /// Duration of the full composite cycle in seconds.
    pub fn cycle_duration(&self) -> f64 {
        self.t_reset
            + self.t_set
            + (self.reads_after_reset + self.reads_after_set) as f64 * self.t_read
    }
}

/// Number of samples covering `period` seconds at `sample_rate` Hz.
pub fn samples_per_period(period: f64, sample_rate: f64) -> Result<usize> {
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(invalid(format!("sample rate must be finite and > 0, got {sample_rate}")));
    }
    let n = (period * sample_rate).round();
    if n < MIN_SAMPLES_PER_PERIOD as f64 {
        return Err(invalid(format!(
            "sample rate {sample_rate} Hz gives {n} samples per {period} s period, need >= {MIN_SAMPLES_PER_PERIOD}"
        )));
    }
    Ok(n as usize)
}

fn triangle(phase: f64, amplitude: f64) -> f64 {
    if phase < 0.25 {
        4.0 * amplitude * phase
    } else if phase < 0.75 {
        amplitude * (2.0 - 4.0 * phase)
    } else {
        amplitude * (4.0 * phase - 4.0)
    }
}

fn square(phase: f64, amplitude: f64, edge: f64) -> f64 {
    if phase < edge {
        amplitude * phase / edge
    } else if phase > 1.0 - edge {
        amplitude * (1.0 - phase) / edge
    } else {
        amplitude
    }
}

/// One period of the given waveform, sampled at `k / sample_rate`.
///
/// READ is a symmetric triangle starting at zero and rising first. SET is a
/// positive square pulse and RESET a negative one, both with linear edges.
pub fn synthesize_waveform(kind: WaveformKind, schedule: &WaveformSchedule, sample_rate: f64) -> Result<Vec<f64>> {
    schedule.validate()?;
    let n = samples_per_period(schedule.period(kind), sample_rate)?;
    let phase = |k: usize| k as f64 / n as f64;
    let edge = schedule.edge_fraction;
    Ok(match kind {
        WaveformKind::Read => (0..n).map(|k| triangle(phase(k), schedule.a_read)).collect(),
        WaveformKind::Set => (0..n).map(|k| square(phase(k), schedule.a_set, edge)).collect(),
        WaveformKind::Reset => (0..n).map(|k| square(phase(k), -schedule.a_reset, edge)).collect(),
    })
}

/// Drive voltage for one composite cycle together with its segment layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleWaveform {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub segments: Vec<Segment>,
}

/// RESET, `reads_after_reset` READs, SET, `reads_after_set` READs.
pub fn synthesize_cycle(schedule: &WaveformSchedule, sample_rate: f64) -> Result<CycleWaveform> {
    schedule.validate()?;
    let segments = cycle_layout(schedule, sample_rate)?;
    let read = synthesize_waveform(WaveformKind::Read, schedule, sample_rate)?;
    let set = synthesize_waveform(WaveformKind::Set, schedule, sample_rate)?;
    let reset = synthesize_waveform(WaveformKind::Reset, schedule, sample_rate)?;
    let mut v = Vec::with_capacity(segments.last().map_or(0, |s| s.end));
    for seg in &segments {
        match seg.kind {
            SegmentKind::Reset => v.extend_from_slice(&reset),
            SegmentKind::Set => v.extend_from_slice(&set),
            SegmentKind::ReadAfterReset(_) | SegmentKind::ReadAfterSet(_) => v.extend_from_slice(&read),
        }
    }
    let t = (0..v.len()).map(|k| k as f64 / sample_rate).collect();
    Ok(CycleWaveform { t, v, segments })
}
