//! Time alignment and systematic offset removal.
//!
//! Offsets are found by minimising the quadrant objective
//!
//! ```text
//! J(dv, di) = sum_n max(0, -(v_n + dv) * (i_n + di))
//! ```
//!
//! which is the total `|v * i|` over points that land in the upper-left or
//! lower-right VI quadrant. A passive device never occupies those quadrants.
//!
//! For a trace whose VI curve is single-valued (ohmic, diode-like) the zero
//! set of `J` is a curve rather than a point: sliding the trace along itself
//! keeps it in the passive quadrants. Among minimisers the search prefers
//! the one whose corrected voltage has zero mean, which holds for drive
//! waveforms sampled over whole periods. That point is kept when it reaches
//! at least 99% of the reduction found by the unconstrained search.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::signal::trace::VITrace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignmentConfig {
    /// Leading samples searched for the alignment point; `None` means 10% of
    /// the trace.
    pub n_discard_max: Option<usize>,
    /// Samples retained after alignment.
    pub n_period: usize,
    /// Bound on `|dv|` in volts (the current bound scales with the
    /// current/voltage amplitude ratio); `None` leaves the search unbounded.
    pub offset_search_range: Option<f64>,
    /// Stop when the search step falls below this fraction of the amplitude.
    pub tolerance: f64,
    pub max_iter: usize,
    /// First step as a fraction of the signal amplitude.
    pub initial_step: f64,
    pub shrink: f64,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        Self {
            n_discard_max: None,
            n_period: 1000,
            offset_search_range: None,
            tolerance: 1e-6,
            max_iter: 200,
            initial_step: 0.05,
            shrink: 0.5,
        }
    }
}

impl AlignmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_period == 0 {
            return Err(invalid("n_period must be finite and > 0"));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(invalid(format!("tolerance must be in (0, 1), got {}", self.tolerance)));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(invalid(format!("shrink must be in (0, 1), got {}", self.shrink)));
        }
        if !(self.initial_step.is_finite() && self.initial_step > 0.0) {
            return Err(invalid("initial_step must be finite and > 0"));
        }
        if let Some(r) = self.offset_search_range {
            if !(r.is_finite() && r > 0.0) {
                return Err(invalid("offset_search_range must be finite and > 0"));
            }
        }
        Ok(())
    }
}

/// Index of the first minimum of `|v|` among the first `window` samples.
pub fn discard_count(v: &[f64], window: usize) -> usize {
    v.iter()
        .take(window)
        .enumerate()
        .fold((0, f64::INFINITY), |(best, best_abs), (k, x)| {
            if x.abs() < best_abs {
                (k, x.abs())
            } else {
                (best, best_abs)
            }
        })
        .0
}

/// Drops leading samples up to the minimum-`|v|` point and keeps exactly
/// `n_period` samples.
pub fn align_time(trace: &VITrace, config: &AlignmentConfig) -> Result<VITrace> {
    config.validate()?;
    let len = trace.len();
    if len < config.n_period {
        return Err(Error::TraceTooShort { needed: config.n_period, available: len });
    }
    let window = config.n_discard_max.unwrap_or(len / 10).min(len);
    let k = discard_count(trace.v(), window);
    if len - k < config.n_period {
        return Err(Error::TraceTooShort { needed: config.n_period, available: len - k });
    }
    Ok(trace.slice(k..k + config.n_period))
}

/// Quadrant objective `J(dv, di)`.
pub fn quadrant_objective(v: &[f64], i: &[f64], dv: f64, di: f64) -> f64 {
    v.iter()
        .zip(i)
        .map(|(v, i)| {
            let p = (v + dv) * (i + di);
            if p < 0.0 {
                -p
            } else {
                0.0
            }
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffsetCorrection {
    pub trace: VITrace,
    /// Volts added to every voltage sample.
    pub dv: f64,
    /// Amps added to every current sample.
    pub di: f64,
    pub objective_before: f64,
    pub objective_after: f64,
    pub iterations: usize,
}

struct Search<'a> {
    v: &'a [f64],
    i: &'a [f64],
    amp_v: f64,
    amp_i: f64,
    bound_v: f64,
    bound_i: f64,
    cfg: &'a AlignmentConfig,
}

impl Search<'_> {
    fn j(&self, dv: f64, di: f64) -> f64 {
        quadrant_objective(self.v, self.i, dv, di)
    }

    fn clamp(&self, dv: f64, di: f64) -> (f64, f64) {
        (dv.clamp(-self.bound_v, self.bound_v), di.clamp(-self.bound_i, self.bound_i))
    }

    /// Coordinate descent with geometric step shrinkage. When `fix_v` is set
    /// only the current offset moves.
    fn descend(&self, mut dv: f64, mut di: f64, fix_v: bool) -> (f64, f64, f64, usize) {
        let mut best = self.j(dv, di);
        let mut step = self.cfg.initial_step;
        let mut iterations = 0;
        while iterations < self.cfg.max_iter && step >= self.cfg.tolerance && best > 0.0 {
            iterations += 1;
            let mut improved = false;
            let axes: &[bool] = if fix_v { &[false] } else { &[true, false] };
            for &along_v in axes {
                for sign in [1.0, -1.0] {
                    let (cv, ci) = if along_v {
                        self.clamp(dv + sign * step * self.amp_v, di)
                    } else {
                        self.clamp(dv, di + sign * step * self.amp_i)
                    };
                    let cand = self.j(cv, ci);
                    if cand < best {
                        best = cand;
                        dv = cv;
                        di = ci;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                step *= self.cfg.shrink;
            }
        }
        (dv, di, best, iterations)
    }

    /// Centre of the interval of `di` values that put every point in a
    /// passive quadrant at fixed `dv`, if that interval is nonempty.
    fn centre_current(&self, dv: f64) -> Option<f64> {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (v, i) in self.v.iter().zip(self.i) {
            let vc = v + dv;
            if vc > 0.0 {
                lo = lo.max(-i);
            } else if vc < 0.0 {
                hi = hi.min(-i);
            }
        }
        (lo.is_finite() && hi.is_finite() && lo <= hi).then_some(0.5 * (lo + hi))
    }
}

/// Finds additive offsets `(dv, di)` that minimise the quadrant objective and
/// returns the corrected trace.
///
/// A trace that already sits in the passive quadrants is returned unchanged.
pub fn correct_offset(trace: &VITrace, config: &AlignmentConfig) -> Result<OffsetCorrection> {
    config.validate()?;
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let (v, i) = (trace.v(), trace.i());
    let j0 = quadrant_objective(v, i, 0.0, 0.0);
    if j0 == 0.0 {
        return Ok(OffsetCorrection {
            trace: trace.clone(),
            dv: 0.0,
            di: 0.0,
            objective_before: 0.0,
            objective_after: 0.0,
            iterations: 0,
        });
    }
    let amp_v = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let amp_i = i.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if amp_v == 0.0 || amp_i == 0.0 || !amp_v.is_finite() || !amp_i.is_finite() {
        return Err(invalid("offset correction needs a trace with nonzero finite voltage and current"));
    }
    let (bound_v, bound_i) = match config.offset_search_range {
        Some(r) => (r, r * amp_i / amp_v),
        None => (f64::INFINITY, f64::INFINITY),
    };
    let search = Search { v, i, amp_v, amp_i, bound_v, bound_i, cfg: config };

    let (mut dv, mut di, mut best, mut iterations) = search.descend(0.0, 0.0, false);

    // Slide along the minimiser set to the zero-mean-voltage point.
    let mean_v = v.iter().sum::<f64>() / v.len() as f64;
    let (cv, _) = search.clamp(-mean_v, 0.0);
    let (cv, mut ci, mut cj, it) = search.descend(cv, di, true);
    iterations += it;
    if cj == 0.0 {
        if let Some(mid) = search.centre_current(cv) {
            let (_, mid) = search.clamp(cv, mid);
            if search.j(cv, mid) == 0.0 {
                ci = mid;
                cj = 0.0;
            }
        }
    }
    // Accept the zero-mean point if it achieves nearly all of the reduction.
    if cj <= best + 0.01 * (j0 - best) {
        dv = cv;
        di = ci;
        best = cj;
    }

    if best >= j0 {
        return Err(Error::OffsetNonConvergence { dv, di });
    }
    Ok(OffsetCorrection {
        trace: trace.with_offsets(dv, di),
        dv,
        di,
        objective_before: j0,
        objective_after: best,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{memristor_current, DeviceParams};

    fn triangle_v(n: usize, periods: usize, amp: f64) -> Vec<f64> {
        (0..n * periods)
            .map(|k| {
                let p = (k % n) as f64 / n as f64;
                if p < 0.25 {
                    4.0 * amp * p
                } else if p < 0.75 {
                    amp * (2.0 - 4.0 * p)
                } else {
                    amp * (4.0 * p - 4.0)
                }
            })
            .collect()
    }

    fn trace(v: Vec<f64>, i: Vec<f64>) -> VITrace {
        let t = (0..v.len()).map(|k| k as f64 * 1e-6).collect();
        VITrace::new(t, v, i).unwrap()
    }

    fn ohmic(amp: f64, r: f64) -> VITrace {
        let v = triangle_v(1000, 2, amp);
        let i = v.iter().map(|v| v / r).collect();
        trace(v, i)
    }

    #[test]
    fn zero_offset_is_left_alone() {
        let c = correct_offset(&ohmic(0.1, 1e6), &AlignmentConfig::default()).unwrap();
        assert!(c.dv.abs() < 1e-9 && c.di.abs() < 1e-9);
        assert_eq!(c.objective_after, 0.0);
    }

    #[test]
    fn ohmic_offsets_recovered() {
        let base = ohmic(0.1, 1e6);
        let (dv, di) = (0.01, 1e-7);
        let c = correct_offset(&base.with_offsets(dv, di), &AlignmentConfig::default()).unwrap();
        assert!((c.dv + dv).abs() <= 0.01 * dv, "dv {}", c.dv);
        assert!((c.di + di).abs() <= 0.01 * di, "di {}", c.di);
    }

    #[test]
    fn diode_trace_objective_driven_to_zero() {
        let p = DeviceParams::default();
        let v = triangle_v(1000, 3, 0.1);
        let i = v.iter().map(|&v| memristor_current(2e-7, v, &p).unwrap()).collect();
        let shifted = trace(v, i).with_offsets(-0.004, 3e-9);
        let c = correct_offset(&shifted, &AlignmentConfig::default()).unwrap();
        assert!(c.objective_after <= 1e-12 * c.objective_before);
        let again = correct_offset(&c.trace, &AlignmentConfig::default()).unwrap();
        assert!(again.dv.abs() < 1e-9 && again.di.abs() < 1e-15);
    }

    #[test]
    fn passive_half_wave_needs_no_correction() {
        let v: Vec<f64> = (0..100).map(|k| (k as f64 * 0.0314).sin().abs()).collect();
        let i = v.iter().map(|v| v * 1e-6).collect();
        let c = correct_offset(&trace(v, i), &AlignmentConfig::default()).unwrap();
        assert_eq!((c.dv, c.di), (0.0, 0.0));
    }

    #[test]
    fn alignment_finds_zero_crossing() {
        let n = 200;
        let full: Vec<f64> = (0..600).map(|k| (2.0 * std::f64::consts::PI * k as f64 / n as f64).sin()).collect();
        let cfg = AlignmentConfig { n_discard_max: Some(40), n_period: 400, ..Default::default() };
        for shift in [0usize, 1, 7, 33] {
            // sin shifted right by `shift` samples: zero at index `shift`.
            let v: Vec<f64> = (0..600)
                .map(|k| (2.0 * std::f64::consts::PI * (k as f64 - shift as f64) / n as f64).sin())
                .collect();
            let tr = trace(v, vec![0.0; 600]);
            assert_eq!(discard_count(tr.v(), 40), shift);
            let out = align_time(&tr, &cfg).unwrap();
            assert_eq!(out.len(), 400);
            assert_eq!(out.t()[0], tr.t()[shift]);
        }
        let tr = trace(full, vec![0.0; 600]);
        assert_eq!(align_time(&tr, &cfg).unwrap().t()[0], 0.0);
    }

    #[test]
    fn alignment_too_short() {
        let tr = trace(vec![1.0, 0.5, 0.0, 0.5], vec![0.0; 4]);
        let cfg = AlignmentConfig { n_discard_max: Some(4), n_period: 3, ..Default::default() };
        assert!(matches!(align_time(&tr, &cfg), Err(Error::TraceTooShort { .. })));
        let cfg = AlignmentConfig { n_period: 5, ..cfg };
        assert!(align_time(&tr, &cfg).is_err());
    }
}
