use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::energy::{EnergyCostModel, EnergyObservation};
use crate::error::{invalid, Result};
use crate::signal::synthetic::SyntheticCycle;
use crate::signal::{VITrace, WaveformSchedule};

/// Synthetic stand-in for the SET-amplitude sweep: each amplitude programs a
/// target state, and the SET pulse dissipates the energy the cost model
/// assigns to that state (with multiplicative noise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyExperiment {
    pub amplitude_lo: f64,
    pub amplitude_hi: f64,
    pub n_amplitudes: usize,
    pub repeats: usize,
    /// RESET amplitude as a multiple of the SET amplitude.
    pub reset_ratio: f64,
    /// State reached by the smallest amplitude (ohms).
    pub r_programmed_hi: f64,
    /// State reached by the largest amplitude (ohms).
    pub r_programmed_lo: f64,
    /// Relative standard deviation of the SET energy.
    pub energy_noise: f64,
    /// Current noise as a fraction of the post-SET READ current amplitude.
    pub current_noise: f64,
    pub max_lead_samples: usize,
    pub dv: f64,
    pub di: f64,
}

impl Default for EnergyExperiment {
    fn default() -> Self {
        Self {
            amplitude_lo: 0.5,
            amplitude_hi: 1.6,
            n_amplitudes: 12,
            repeats: 4,
            reset_ratio: 1.0,
            r_programmed_hi: 5e6,
            r_programmed_lo: 1e5,
            energy_noise: 0.02,
            current_noise: 1e-3,
            max_lead_samples: 20,
            dv: -5e-4,
            di: 2e-9,
        }
    }
}

/// One synthesized cycle of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentCycle {
    pub amplitude: f64,
    pub repeat: usize,
    pub r_target: f64,
    pub set_energy: f64,
    pub trace: VITrace,
}

impl EnergyExperiment {
    pub fn validate(&self) -> Result<()> {
        if self.n_amplitudes == 0 || self.repeats == 0 {
            return Err(invalid("experiment needs at least one amplitude and one repeat"));
        }
        if !(self.amplitude_lo > 0.0 && self.amplitude_hi >= self.amplitude_lo) {
            return Err(invalid("experiment amplitudes must satisfy 0 < lo <= hi"));
        }
        if !(self.r_programmed_lo > 0.0 && self.r_programmed_hi >= self.r_programmed_lo) {
            return Err(invalid("programmed states must satisfy 0 < lo <= hi"));
        }
        if !(self.reset_ratio > 0.0 && self.energy_noise >= 0.0 && self.current_noise >= 0.0) {
            return Err(invalid("reset_ratio must be > 0 and noise levels >= 0"));
        }
        Ok(())
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        let n = self.n_amplitudes;
        (0..n)
            .map(|k| {
                if n == 1 {
                    self.amplitude_lo
                } else {
                    self.amplitude_lo + (self.amplitude_hi - self.amplitude_lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    /// Target state for amplitude index `k`: log-linear from
    /// `r_programmed_hi` down to `r_programmed_lo`.
    pub fn target_state(&self, k: usize) -> f64 {
        let frac = if self.n_amplitudes > 1 { k as f64 / (self.n_amplitudes - 1) as f64 } else { 0.0 };
        (self.r_programmed_hi.ln() + (self.r_programmed_lo.ln() - self.r_programmed_hi.ln()) * frac).exp()
    }

    /// Renders every cycle of the sweep, amplitude-major.
    pub fn synthesize<R: Rng + ?Sized>(
        &self,
        schedule: &WaveformSchedule,
        sample_rate: f64,
        params: &DeviceParams,
        model: &EnergyCostModel,
        rng: &mut R,
    ) -> Result<Vec<ExperimentCycle>> {
        self.validate()?;
        model.validate()?;
        let mut out = Vec::with_capacity(self.n_amplitudes * self.repeats);
        for (k, amplitude) in self.amplitudes().into_iter().enumerate() {
            let sched = WaveformSchedule { a_set: amplitude, a_reset: amplitude * self.reset_ratio, ..*schedule };
            let r_target = self.target_state(k);
            let read_peak = params.conductance_term(sched.a_read).abs() / r_target;
            for repeat in 0..self.repeats {
                let z: f64 = rng.sample(StandardNormal);
                let set_energy = (model.cost(r_target) * (1.0 + self.energy_noise * z)).max(0.0);
                let lead_samples = rng.random_range(0..=self.max_lead_samples);
                let spec = SyntheticCycle {
                    schedule: sched,
                    sample_rate,
                    x_reset: 1.0 / model.b,
                    x_set: 1.0 / r_target,
                    set_energy,
                    lead_samples,
                    dv: self.dv,
                    di: self.di,
                    current_noise: self.current_noise * read_peak,
                };
                let trace = spec.render(params, rng)?;
                out.push(ExperimentCycle { amplitude, repeat, r_target, set_energy, trace });
            }
        }
        Ok(out)
    }
}

/// Observations drawn directly from the cost model: `repeats` copies of each
/// state in `states`, energies scaled by `1 + noise * N(0, 1)`.
pub fn synthesize_observations<R: Rng + ?Sized>(
    model: &EnergyCostModel,
    states: &[f64],
    repeats: usize,
    noise: f64,
    rng: &mut R,
) -> Vec<EnergyObservation> {
    let mut out = Vec::with_capacity(states.len() * repeats);
    for _ in 0..repeats {
        for &r in states {
            let z: f64 = rng.sample(StandardNormal);
            out.push(EnergyObservation { r, e: (model.cost(r) * (1.0 + noise * z)).max(0.0) });
        }
    }
    out
}
