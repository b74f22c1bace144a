use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::drift::{DriftRng, DriftSampler, RetentionSeries};
use crate::energy::DEFAULT_B;
use crate::error::{invalid, Result};

/// Log-space mean-reverting drift toward an equilibrium state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceDriftParams {
    /// Ohms.
    pub equilibrium: f64,
    /// Per minute.
    pub reversion_rate: f64,
    /// Per square-root minute, in log-resistance units.
    pub volatility: f64,
}

impl Default for ReferenceDriftParams {
    fn default() -> Self {
        Self { equilibrium: DEFAULT_B, reversion_rate: 0.05, volatility: 0.1 }
    }
}

impl ReferenceDriftParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.equilibrium.is_finite() && self.equilibrium > 0.0) {
            return Err(invalid(format!("equilibrium must be finite and > 0, got {}", self.equilibrium)));
        }
        if !(self.reversion_rate.is_finite() && self.reversion_rate >= 0.0) {
            return Err(invalid(format!("reversion_rate must be finite and >= 0, got {}", self.reversion_rate)));
        }
        if !(self.volatility.is_finite() && self.volatility >= 0.0) {
            return Err(invalid(format!("volatility must be finite and >= 0, got {}", self.volatility)));
        }
        Ok(())
    }

    /// Exact transition of the log-state over `dt` minutes.
    fn step(&self, log_r: f64, dt: f64, rng: &mut DriftRng) -> f64 {
        let target = self.equilibrium.ln();
        let theta = self.reversion_rate;
        let decay = (-theta * dt).exp();
        let mean = target + (log_r - target) * decay;
        if self.volatility == 0.0 {
            return mean;
        }
        let var = if theta > 0.0 {
            self.volatility * self.volatility * (-(-2.0 * theta * dt).exp_m1()) / (2.0 * theta)
        } else {
            self.volatility * self.volatility * dt
        };
        let z: f64 = StandardNormal.sample(rng);
        mean + var.sqrt() * z
    }

    /// Advances `r0` by `delay` minutes in one-minute steps (the last step
    /// takes the remainder).
    pub fn advance(&self, r0: f64, delay: f64, rng: &mut DriftRng) -> Result<f64> {
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(invalid(format!("initial state must be finite and > 0, got {r0}")));
        }
        if !(delay.is_finite() && delay >= 0.0) {
            return Err(invalid(format!("delay must be finite and >= 0, got {delay}")));
        }
        let mut log_r = r0.ln();
        let whole = delay.floor();
        for _ in 0..whole as u64 {
            log_r = self.step(log_r, 1.0, rng);
        }
        let rest = delay - whole;
        if rest > 0.0 {
            log_r = self.step(log_r, rest, rng);
        }
        Ok(log_r.exp())
    }
}

/// Reference drift wrapped as a [`DriftSampler`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceDrift(pub ReferenceDriftParams);

impl ReferenceDrift {
    pub fn new(params: ReferenceDriftParams) -> Result<Self> {
        params.validate()?;
        Ok(Self(params))
    }
}

impl DriftSampler for ReferenceDrift {
    fn sample(&self, r0: f64, delay: f64, rng: &mut DriftRng) -> Result<f64> {
        self.0.advance(r0, delay, rng)
    }
}

/// One reference-drift draw, seeded.
pub fn reference_drift_sample(r0: f64, delay: f64, params: &ReferenceDriftParams, seed: u64) -> Result<f64> {
    params.validate()?;
    let mut rng = DriftRng::seed_from_u64(seed);
    params.advance(r0, delay, &mut rng)
}

/// Simulated retention run sampled every minute over `[0, duration]`.
pub fn reference_drift_path(
    r0: f64,
    duration: usize,
    params: &ReferenceDriftParams,
    rng: &mut DriftRng,
) -> Result<RetentionSeries> {
    params.validate()?;
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(invalid(format!("initial state must be finite and > 0, got {r0}")));
    }
    let mut r = vec![r0];
    for _ in 0..duration {
        let last = *r.last().expect("nonempty");
        r.push(params.advance(last, 1.0, rng)?);
    }
    RetentionSeries::new((0..=duration).map(|k| k as f64).collect(), r)
}
