use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::error::{invalid, Error, Result};

/// One raw oscilloscope sample: total circuit voltage and series-resistor voltage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub t: f64,
    pub v_total: f64,
    pub v_series: f64,
}

/// Time-stamped memristor voltage/current pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VITrace {
    t: Vec<f64>,
    v: Vec<f64>,
    i: Vec<f64>,
}

impl VITrace {
    /// Builds a trace; the three sequences must have equal length and `t`
    /// must be strictly increasing.
    pub fn new(t: Vec<f64>, v: Vec<f64>, i: Vec<f64>) -> Result<Self> {
        if t.len() != v.len() || t.len() != i.len() {
            return Err(invalid(format!(
                "trace columns differ in length: t={}, v={}, i={}",
                t.len(),
                v.len(),
                i.len()
            )));
        }
        check_increasing(&t)?;
        Ok(Self { t, v, i })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn i(&self) -> &[f64] {
        &self.i
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        (self.t, self.v, self.i)
    }

    /// Sub-trace over `range` (sample indices).
    pub fn slice(&self, range: std::ops::Range<usize>) -> VITrace {
        VITrace {
            t: self.t[range.clone()].to_vec(),
            v: self.v[range.clone()].to_vec(),
            i: self.i[range].to_vec(),
        }
    }

    /// Trace with `dv` added to every voltage and `di` to every current.
    pub fn with_offsets(&self, dv: f64, di: f64) -> VITrace {
        VITrace {
            t: self.t.clone(),
            v: self.v.iter().map(|v| v + dv).collect(),
            i: self.i.iter().map(|i| i + di).collect(),
        }
    }

    /// Concatenates traces in order; timestamps must keep increasing.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a VITrace>) -> Result<VITrace> {
        let mut out = VITrace::default();
        for p in parts {
            out.t.extend_from_slice(&p.t);
            out.v.extend_from_slice(&p.v);
            out.i.extend_from_slice(&p.i);
        }
        check_increasing(&out.t)?;
        Ok(out)
    }

    /// Measurement-frame records that reproduce this trace through
    /// [`to_vi_trace`]: `V_s = i * R_s`, `V_t = v + V_s`.
    pub fn to_records(&self, params: &DeviceParams) -> Vec<MeasurementRecord> {
        self.t
            .iter()
            .zip(&self.v)
            .zip(&self.i)
            .map(|((&t, &v), &i)| {
                let v_series = i * params.r_series;
                MeasurementRecord { t, v_total: v + v_series, v_series }
            })
            .collect()
    }
}

fn check_increasing(t: &[f64]) -> Result<()> {
    if let Some(bad) = t.iter().position(|x| !x.is_finite()) {
        return Err(invalid(format!("non-finite timestamp at index {bad}")));
    }
    if let Some(k) = t.windows(2).position(|w| w[1] <= w[0]) {
        return Err(invalid(format!("timestamps not strictly increasing at index {}", k + 1)));
    }
    Ok(())
}

/// Converts raw channel voltages into memristor voltage `V_t - V_s` and
/// current `V_s / R_s`.
pub fn to_vi_trace(records: &[MeasurementRecord], params: &DeviceParams) -> Result<VITrace> {
    if records.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if !(params.r_series > 0.0 && params.r_series.is_finite()) {
        return Err(invalid("series resistance must be finite and > 0"));
    }
    let t = records.iter().map(|r| r.t).collect();
    let v = records.iter().map(|r| r.v_total - r.v_series).collect();
    let i = records.iter().map(|r| r.v_series / params.r_series).collect();
    VITrace::new(t, v, i)
}

/// Trapezoidal integral of `v * i` over the trace, in joules.
pub fn pulse_energy(trace: &VITrace) -> Result<f64> {
    if trace.len() < 2 {
        return Err(Error::TraceTooShort { needed: 2, available: trace.len() });
    }
    let p: Vec<f64> = trace.v.iter().zip(&trace.i).map(|(v, i)| v * i).collect();
    Ok(trace
        .t
        .windows(2)
        .zip(p.windows(2))
        .map(|(t, p)| 0.5 * (t[1] - t[0]) * (p[0] + p[1]))
        .sum())
}
