//! Delay-conditioned storage channel `P(R_hat | R, D)`.
//!
//! Delays are in minutes throughout.

mod channel;
mod grid;
pub mod io;
mod reference;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use channel::{channel_from_samples, estimate_channel, simulate_drift_samples, DriftChannelMatrix};
pub use grid::{make_grid, quantise_value, QuantisationGrid};
pub use reference::{reference_drift_path, reference_drift_sample, ReferenceDrift, ReferenceDriftParams};

/// Random source handed to drift samplers.
pub type DriftRng = ChaCha8Rng;

/// Draws the state reached after `delay` minutes from initial state `r0`.
pub trait DriftSampler: Sync {
    fn sample(&self, r0: f64, delay: f64, rng: &mut DriftRng) -> Result<f64>;
}

impl<F> DriftSampler for F
where
    F: Fn(f64, f64, &mut DriftRng) -> Result<f64> + Sync,
{
    fn sample(&self, r0: f64, delay: f64, rng: &mut DriftRng) -> Result<f64> {
        self(r0, delay, rng)
    }
}

/// One transition of the storage channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSample {
    /// Written state in ohms.
    pub r_init: f64,
    /// Minutes.
    pub delay: f64,
    /// State read back in ohms.
    pub r_final: f64,
}

impl DriftSample {
    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("r_init", self.r_init), ("delay", self.delay), ("r_final", self.r_final)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(invalid(format!("{name} must be finite and > 0, got {x}")));
            }
        }
        Ok(())
    }
}

/// State estimates of one retention run, sampled over time.
#[derive(Debug, Clone, PartialEq)]
pub struct RetentionSeries {
    t: Vec<f64>,
    r: Vec<f64>,
}

impl RetentionSeries {
    /// `t` in minutes (strictly increasing), `r` in ohms (positive).
    pub fn new(t: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        if t.len() != r.len() {
            return Err(invalid(format!("retention series lengths differ: {} vs {}", t.len(), r.len())));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) || t.iter().any(|x| !x.is_finite()) {
            return Err(invalid("retention times must be finite and strictly increasing"));
        }
        if r.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(invalid("retention states must be finite and > 0"));
        }
        Ok(Self { t, r })
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}
