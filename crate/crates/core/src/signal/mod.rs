//! Waveforms, measurement conversion and trace preprocessing.

pub mod align;
pub mod io;
mod preprocess;
pub mod segment;
pub mod synthetic;
mod trace;
pub mod waveform;

pub use align::{align_time, correct_offset, quadrant_objective, AlignmentConfig, OffsetCorrection};
pub use preprocess::{preprocess_cycle, PreprocessedCycle};
pub use segment::{segment_cycle, Segment, SegmentKind};
pub use trace::{pulse_energy, to_vi_trace, MeasurementRecord, VITrace};
pub use waveform::{synthesize_cycle, synthesize_waveform, WaveformKind, WaveformSchedule};
