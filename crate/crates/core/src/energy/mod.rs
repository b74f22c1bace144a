//! Programming-energy cost model and its least-squares fit.
//!
//! The cost of bringing a device from its equilibrium state `B` to state `r`
//! is `E(r) = |A * ln|B / r||`.

mod experiment;
mod fit;
pub mod io;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use experiment::{synthesize_observations, EnergyExperiment, ExperimentCycle};
pub use fit::{fit_energy_model, observations_from_cycles, FitDiagnostics, SegmentedCycle};

/// Fitted value of `A` (joules) for the W+SDC device.
pub const DEFAULT_A: f64 = 0.000239506;
/// Fitted equilibrium state `B` (ohms) for the W+SDC device.
pub const DEFAULT_B: f64 = 7.1853e6;

/// Physical reading of the cost parameters. Stored as metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalDecomposition {
    pub r_eq: f64,
    pub r_final: f64,
    pub tau_final: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyCostModel {
    /// Joules.
    pub a: f64,
    /// Equilibrium state in ohms.
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<PhysicalDecomposition>,
}

impl Default for EnergyCostModel {
    fn default() -> Self {
        Self { a: DEFAULT_A, b: DEFAULT_B, decomposition: None }
    }
}

impl EnergyCostModel {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let m = Self { a, b, decomposition: None };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() {
            return Err(invalid(format!("A must be finite, got {}", self.a)));
        }
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(invalid(format!("B must be finite and > 0, got {}", self.b)));
        }
        if let Some(d) = &self.decomposition {
            if d.r_eq != self.b {
                return Err(invalid(format!("decomposition r_eq {} differs from B {}", d.r_eq, self.b)));
            }
        }
        Ok(())
    }

    /// `|A * ln|B / r||` without argument checks.
    #[inline]
    pub fn cost(&self, r: f64) -> f64 {
        (self.a * (self.b / r).abs().ln()).abs()
    }
}

/// Energy needed to program state `r` (ohms) from equilibrium.
pub fn energy_cost(r: f64, model: &EnergyCostModel) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("state must be finite and > 0, got {r}")));
    }
    Ok(model.cost(r))
}

/// One (state, SET energy) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyObservation {
    /// Programmed state in ohms.
    pub r: f64,
    /// SET pulse energy in joules.
    pub e: f64,
}

impl EnergyObservation {
    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(invalid(format!("observation state must be finite and > 0, got {}", self.r)));
        }
        if !(self.e >= 0.0 && self.e.is_finite()) {
            return Err(invalid(format!("observation energy must be finite and >= 0, got {}", self.e)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_at_equilibrium() {
        let m = EnergyCostModel::default();
        assert_eq!(energy_cost(DEFAULT_B, &m).unwrap(), 0.0);
    }

    #[test]
    fn one_e_fold_costs_a() {
        let m = EnergyCostModel::new(3e-4, 5e6).unwrap();
        let e = energy_cost(5e6 / std::f64::consts::E, &m).unwrap();
        assert!((e - 3e-4).abs() < 1e-18);
    }

    #[test]
    fn default_parameters_at_one_megaohm() {
        // 0.000239506 * ln(7.1853) at 50 digits.
        let expected = 4.723_147_589_425_431e-4;
        let e = energy_cost(1e6, &EnergyCostModel::default()).unwrap();
        assert!((e - expected).abs() <= 1e-15 * expected);
    }

    #[test]
    fn symmetric_in_log_distance() {
        let m = EnergyCostModel::default();
        for f in [1.5, 4.0, 30.0] {
            let below = energy_cost(DEFAULT_B / f, &m).unwrap();
            let above = energy_cost(DEFAULT_B * f, &m).unwrap();
            assert!((below - above).abs() <= 1e-15 * below);
        }
    }

    #[test]
    fn monotone_on_each_branch() {
        let m = EnergyCostModel::default();
        let rs: Vec<f64> = (0..400).map(|k| 1e4 * 1.03_f64.powi(k)).collect();
        for w in rs.windows(2) {
            let (e0, e1) = (m.cost(w[0]), m.cost(w[1]));
            if w[1] < DEFAULT_B {
                assert!(e1 < e0);
            } else if w[0] > DEFAULT_B {
                assert!(e1 > e0);
            }
        }
    }

    #[test]
    fn rejects_non_positive_state() {
        let m = EnergyCostModel::default();
        assert!(energy_cost(0.0, &m).is_err());
        assert!(energy_cost(-5.0, &m).is_err());
        assert!(EnergyCostModel::new(1.0, 0.0).is_err());
    }
}
