use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{blahut_arimoto, BaOptions, CapacityCurvePoint, ChannelSpec};
use crate::drift::DriftChannelMatrix;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SSpacing {
    Log,
    Linear,
}

/// Tilt values to sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub spacing: SSpacing,
}

impl Default for SGrid {
    fn default() -> Self {
        Self { lo: 1e-9, hi: 1e5, n: 100, spacing: SSpacing::Log }
    }
}

impl SGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let Self { lo, hi, n, spacing } = *self;
        if n == 0 {
            return Err(invalid("s grid needs at least one point"));
        }
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo) {
            return Err(invalid(format!("s grid bounds must satisfy 0 <= lo <= hi, got [{lo}, {hi}]")));
        }
        if n == 1 {
            return Ok(vec![lo]);
        }
        let frac = |k: usize| k as f64 / (n - 1) as f64;
        let mut v: Vec<f64> = match spacing {
            SSpacing::Linear => (0..n).map(|k| lo + frac(k) * (hi - lo)).collect(),
            SSpacing::Log => {
                if lo <= 0.0 {
                    return Err(invalid("logarithmic s grid needs lo > 0"));
                }
                let (a, b) = (lo.ln(), hi.ln());
                (0..n).map(|k| (a + frac(k) * (b - a)).exp()).collect()
            }
        };
        v[0] = lo;
        v[n - 1] = hi;
        Ok(v)
    }
}

/// Runs Blahut-Arimoto at every tilt in `s_values` and returns the points
/// sorted by average energy. Non-converged points stay in the list with
/// their flag cleared.
pub fn capacity_cost_curve(
    channel: &ChannelSpec,
    s_values: &[f64],
    opts: &BaOptions,
) -> Result<Vec<CapacityCurvePoint>> {
    if s_values.is_empty() {
        return Err(invalid("s grid is empty"));
    }
    opts.validate()?;
    let mut points = s_values
        .par_iter()
        .map(|&s| blahut_arimoto(channel, s, opts))
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| a.avg_energy.total_cmp(&b.avg_energy).then(b.s.total_cmp(&a.s)));
    Ok(points)
}

/// Capacity-cost curve of the channel at one delay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayCurve {
    pub delay: f64,
    pub points: Vec<CapacityCurvePoint>,
}

impl DelayCurve {
    pub fn max_capacity(&self) -> f64 {
        self.points.iter().map(|p| p.capacity).fold(0.0, f64::max)
    }
}

/// One curve per channel, in input order. All channels must share their
/// quantisation grids and input costs.
pub fn delay_sweep(channels: &[DriftChannelMatrix], s_values: &[f64], opts: &BaOptions) -> Result<Vec<DelayCurve>> {
    let Some(first) = channels.first() else {
        return Err(invalid("no channels to sweep"));
    };
    for m in &channels[1..] {
        if m.input_grid != first.input_grid || m.output_grid != first.output_grid {
            return Err(Error::InconsistentChannels(format!(
                "channel at delay {} uses different grids from delay {}",
                m.delay, first.delay
            )));
        }
        if m.costs != first.costs {
            return Err(Error::InconsistentChannels(format!("channel at delay {} has different input costs", m.delay)));
        }
    }
    channels
        .iter()
        .map(|m| Ok(DelayCurve { delay: m.delay, points: capacity_cost_curve(&m.to_channel_spec()?, s_values, opts)? }))
        .collect()
}
