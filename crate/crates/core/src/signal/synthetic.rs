//! Synthetic measured cycles for exercising the preprocessing chain.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::device::{memristor_current, DeviceParams};
use crate::error::{invalid, Result};
use crate::signal::segment::SegmentKind;
use crate::signal::trace::VITrace;
use crate::signal::waveform::{synthesize_cycle, synthesize_waveform, WaveformKind, WaveformSchedule};

/// Describes one synthetic RESET-READ-SET-READ cycle.
///
/// The device sits at `x_reset` during RESET and the following READs and at
/// `x_set` during the READs after SET. During the SET pulse the current is
/// ohmic with the conductance that dissipates exactly `set_energy` joules
/// under trapezoidal integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticCycle {
    pub schedule: WaveformSchedule,
    pub sample_rate: f64,
    pub x_reset: f64,
    pub x_set: f64,
    pub set_energy: f64,
    /// Samples of a trailing READ period prepended before the cycle.
    pub lead_samples: usize,
    /// Constant voltage offset added to every sample.
    pub dv: f64,
    /// Constant current offset added to every sample.
    pub di: f64,
    /// Standard deviation of additive Gaussian current noise.
    pub current_noise: f64,
}

fn trapz_sq(v: &[f64], dt: f64) -> f64 {
    v.windows(2).map(|w| 0.5 * dt * (w[0] * w[0] + w[1] * w[1])).sum()
}

impl SyntheticCycle {
    /// Renders the device-frame trace.
    pub fn render<R: Rng + ?Sized>(&self, params: &DeviceParams, rng: &mut R) -> Result<VITrace> {
        if !(self.x_reset >= 0.0 && self.x_set >= 0.0 && self.set_energy >= 0.0) {
            return Err(invalid("synthetic cycle needs non-negative states and SET energy"));
        }
        let cycle = synthesize_cycle(&self.schedule, self.sample_rate)?;
        let dt = 1.0 / self.sample_rate;
        let read = synthesize_waveform(WaveformKind::Read, &self.schedule, self.sample_rate)?;
        let lead = self.lead_samples.min(read.len());

        let mut v: Vec<f64> = read[read.len() - lead..].to_vec();
        let mut i: Vec<f64> = v
            .iter()
            .map(|&v| memristor_current(self.x_reset, v, params))
            .collect::<Result<_>>()?;
        for seg in &cycle.segments {
            let sv = &cycle.v[seg.range()];
            match seg.kind {
                SegmentKind::Set => {
                    let w = trapz_sq(sv, dt);
                    let g = if w > 0.0 { self.set_energy / w } else { 0.0 };
                    i.extend(sv.iter().map(|v| g * v));
                }
                SegmentKind::ReadAfterSet(_) => {
                    for &x in sv {
                        i.push(memristor_current(self.x_set, x, params)?);
                    }
                }
                SegmentKind::Reset | SegmentKind::ReadAfterReset(_) => {
                    for &x in sv {
                        i.push(memristor_current(self.x_reset, x, params)?);
                    }
                }
            }
            v.extend_from_slice(sv);
        }
        if self.current_noise > 0.0 {
            for x in &mut i {
                let z: f64 = rng.sample(StandardNormal);
                *x += self.current_noise * z;
            }
        }
        let t = (0..v.len()).map(|k| k as f64 * dt).collect();
        Ok(VITrace::new(t, v, i)?.with_offsets(self.dv, self.di))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::pulse_energy;
    use crate::signal::segment::segment_cycle;
    use rand::SeedableRng;

    #[test]
    fn set_segment_dissipates_requested_energy() {
        let spec = SyntheticCycle {
            schedule: WaveformSchedule::default(),
            sample_rate: 1e5,
            x_reset: 1.0 / 7e6,
            x_set: 1e-6,
            set_energy: 3.2e-4,
            lead_samples: 0,
            dv: 0.0,
            di: 0.0,
            current_noise: 0.0,
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let tr = spec.render(&DeviceParams::default(), &mut rng).unwrap();
        let segs = segment_cycle(&tr, &spec.schedule, spec.sample_rate).unwrap();
        let set = segs.iter().find(|s| s.kind == SegmentKind::Set).unwrap();
        let e = pulse_energy(&tr.slice(set.range())).unwrap();
        assert!((e - 3.2e-4).abs() < 1e-16);
    }
}
