//! SDC memristor VI/state model and the minimum-variance state estimator.
//!
//! The instantaneous current through the device is
//!
//! ```text
//! i(x, v) = x * (G_m * v + I_d(v))
//! I_d(v)  = alpha_1 * (exp(beta_1 * v) - 1) + alpha_2 * (1 - exp(-beta_2 * v))
//! ```
//!
//! where `x` is the state variable. States are reported as the scaled
//! resistance `1 / x` in ohms.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::signal::VITrace;

/// Default magnitude below which a pair's model denominator is treated as zero.
pub const DEFAULT_DENOMINATOR_EPS: f64 = 1e-12;

/// VI-model constants for one device plus the measurement series resistor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceParams {
    pub g_m: f64,
    /// Amps.
    pub alpha_1: f64,
    /// Amps.
    pub alpha_2: f64,
    /// Per volt.
    pub beta_1: f64,
    /// Per volt.
    pub beta_2: f64,
    /// Series resistor in ohms.
    pub r_series: f64,
}

impl Default for DeviceParams {
    /// Knowm W+SDC parameters with a 100 kOhm series resistor.
    fn default() -> Self {
        Self {
            g_m: 4.207,
            alpha_1: 2.73e-3,
            alpha_2: 1.313e-7,
            beta_1: 13.92,
            beta_2: 2.327e-6,
            r_series: 1.0e5,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("g_m", self.g_m),
            ("alpha_1", self.alpha_1),
            ("alpha_2", self.alpha_2),
            ("beta_1", self.beta_1),
            ("beta_2", self.beta_2),
            ("r_series", self.r_series),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(format!("device parameter {name} must be finite and > 0, got {value}")));
            }
        }
        Ok(())
    }

    /// `G_m * v + I_d(v)`: the current per unit state at voltage `v`.
    #[inline]
    pub fn conductance_term(&self, v: f64) -> f64 {
        self.g_m * v + self.diode(v)
    }

    #[inline]
    fn diode(&self, v: f64) -> f64 {
        self.alpha_1 * (self.beta_1 * v).exp_m1() - self.alpha_2 * (-self.beta_2 * v).exp_m1()
    }

    /// Low-voltage resistance `1 / (x * G_m)` implied by state `x`.
    ///
    /// Reported states use the `1 / x` convention instead; this helper gives
    /// the physically scaled value.
    pub fn physical_resistance(&self, x: f64) -> f64 {
        1.0 / (x * self.g_m)
    }
}

/// Diode component `I_d(v)` of the device current.
pub fn diode_current(v: f64, params: &DeviceParams) -> Result<f64> {
    if !v.is_finite() {
        return Err(invalid(format!("voltage must be finite, got {v}")));
    }
    Ok(params.diode(v))
}

/// Device current `x * (G_m * v + I_d(v))`.
pub fn memristor_current(x: f64, v: f64, params: &DeviceParams) -> Result<f64> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(invalid(format!("state must be finite and >= 0, got {x}")));
    }
    if !v.is_finite() {
        return Err(invalid(format!("voltage must be finite, got {v}")));
    }
    Ok(x * params.conductance_term(v))
}

/// Result of [`estimate_state`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateEstimate {
    /// State variable.
    pub x: f64,
    /// Scaled resistance `1 / x` in ohms.
    pub r_reported: f64,
    /// `1 / sum(K_n)`; smaller means a tighter estimate.
    pub variance_proxy: f64,
    pub pairs_used: usize,
    pub pairs_excluded: usize,
}

/// Per-pair precisions `K_n` and normalised weights `c_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationWeights {
    pub precision: Vec<f64>,
    pub weight: Vec<f64>,
    /// Indices into the source trace that carry a weight.
    pub indices: Vec<usize>,
}

/// Computes `K_n = (G_m v_n + I_d(v_n))^2` and `c_n = K_n / sum K` for every
/// voltage whose denominator magnitude is at least `eps`.
pub fn estimation_weights(v: &[f64], params: &DeviceParams, eps: f64) -> Result<EstimationWeights> {
    if v.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut precision = Vec::with_capacity(v.len());
    let mut indices = Vec::with_capacity(v.len());
    for (n, &vn) in v.iter().enumerate() {
        let den = params.conductance_term(vn);
        if den.abs() >= eps && den.is_finite() {
            precision.push(den * den);
            indices.push(n);
        }
    }
    if indices.is_empty() {
        return Err(Error::DegenerateTrace { excluded: v.len() });
    }
    let total: f64 = precision.iter().sum();
    let weight = precision.iter().map(|k| k / total).collect();
    Ok(EstimationWeights { precision, weight, indices })
}

/// Minimum-variance state estimate with the default denominator cutoff.
pub fn estimate_state(trace: &VITrace, params: &DeviceParams) -> Result<StateEstimate> {
    estimate_state_with_eps(trace, params, DEFAULT_DENOMINATOR_EPS)
}

/// Weighted state estimate `sum_n c_n * i_n / (G_m v_n + I_d(v_n))`.
///
/// Pairs whose denominator magnitude is below `eps` are skipped and counted
/// in `pairs_excluded`.
pub fn estimate_state_with_eps(trace: &VITrace, params: &DeviceParams, eps: f64) -> Result<StateEstimate> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let (v, i) = (trace.v(), trace.i());
    let weights = estimation_weights(v, params, eps)?;
    let x: f64 = weights
        .indices
        .iter()
        .zip(&weights.weight)
        .map(|(&n, c)| c * i[n] / params.conductance_term(v[n]))
        .sum();
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid(format!("estimated state {x} is not positive")));
    }
    let total_precision: f64 = weights.precision.iter().sum();
    Ok(StateEstimate {
        x,
        r_reported: 1.0 / x,
        variance_proxy: 1.0 / total_precision,
        pairs_used: weights.indices.len(),
        pairs_excluded: v.len() - weights.indices.len(),
    })
}
