//! Mutual information and energy-constrained capacity of discrete channels.
//!
//! All internal arithmetic is in nats; results are reported in bits.

mod blahut;
pub mod io;
mod sweep;

use std::f64::consts::LN_2;

use crate::error::{invalid, Error, Result};

pub use blahut::{blahut_arimoto, BaOptions, CapacityCurvePoint};
pub use sweep::{capacity_cost_curve, delay_sweep, DelayCurve, SGrid, SSpacing};

const ROW_TOL: f64 = 1e-9;

/// Row-stochastic transition matrix with a cost per input symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    q_in: usize,
    q_out: usize,
    p: Vec<f64>,
    costs: Vec<f64>,
}

impl ChannelSpec {
    /// `p` is row-major `q_in x q_out`; `costs` has one entry per row.
    pub fn new(q_in: usize, q_out: usize, p: Vec<f64>, costs: Vec<f64>) -> Result<Self> {
        if q_in == 0 || q_out == 0 {
            return Err(Error::DimensionMismatch(format!("channel must be non-empty, got {q_in}x{q_out}")));
        }
        if p.len() != q_in * q_out {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} entries, expected {q_in}x{q_out}",
                p.len()
            )));
        }
        if costs.len() != q_in {
            return Err(Error::DimensionMismatch(format!("{} costs for {q_in} inputs", costs.len())));
        }
        if let Some(x) = p.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid(format!("transition entry {x} is {}", p[x])));
        }
        for (x, row) in p.chunks(q_out).enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOL {
                return Err(invalid(format!("row {x} sums to {sum}")));
            }
        }
        if let Some(x) = costs.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(invalid(format!("cost of input {x} is {}", costs[x])));
        }
        Ok(Self { q_in, q_out, p, costs })
    }

    pub fn from_rows(rows: &[Vec<f64>], costs: Vec<f64>) -> Result<Self> {
        let q_out = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != q_out) {
            return Err(Error::DimensionMismatch("rows have different lengths".into()));
        }
        Self::new(rows.len(), q_out, rows.concat(), costs)
    }

    pub fn q_in(&self) -> usize {
        self.q_in
    }

    pub fn q_out(&self) -> usize {
        self.q_out
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.p[x * self.q_out..(x + 1) * self.q_out]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// Output distribution induced by `p_input`.
    pub(crate) fn output_distribution(&self, p_input: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.q_out];
        for (x, &px) in p_input.iter().enumerate() {
            if px > 0.0 {
                for (qy, &pyx) in q.iter_mut().zip(self.row(x)) {
                    *qy += px * pyx;
                }
            }
        }
        q
    }

    /// `I(X;Y)` in nats, with `0 log 0 = 0`.
    pub(crate) fn information_nats(&self, p_input: &[f64]) -> f64 {
        let q = self.output_distribution(p_input);
        let mut total = 0.0;
        for (x, &px) in p_input.iter().enumerate() {
            if px > 0.0 {
                let mut dx = 0.0;
                for (&pyx, &qy) in self.row(x).iter().zip(&q) {
                    if pyx > 0.0 {
                        dx += pyx * (pyx / qy).ln();
                    }
                }
                total += px * dx;
            }
        }
        total
    }
}

pub(crate) fn check_distribution(p: &[f64], n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::DimensionMismatch(format!("distribution has {} entries, channel has {n} inputs", p.len())));
    }
    if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(invalid("distribution entries must be finite and >= 0"));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > ROW_TOL {
        return Err(invalid(format!("distribution sums to {sum}")));
    }
    Ok(())
}

/// Mutual information in bits between input `p_input` and the channel output.
pub fn mutual_information(p_input: &[f64], channel: &ChannelSpec) -> Result<f64> {
    check_distribution(p_input, channel.q_in())?;
    Ok((channel.information_nats(p_input) / LN_2).max(0.0))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub fn bsc(flip: f64) -> ChannelSpec {
        ChannelSpec::from_rows(&[vec![1.0 - flip, flip], vec![flip, 1.0 - flip]], vec![0.0, 0.0]).unwrap()
    }

    pub fn h2(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    #[test]
    fn identity_channel_carries_log_q() {
        for q in [2usize, 5, 64] {
            let mut p = vec![0.0; q * q];
            for k in 0..q {
                p[k * q + k] = 1.0;
            }
            let ch = ChannelSpec::new(q, q, p, vec![0.0; q]).unwrap();
            let mi = mutual_information(&vec![1.0 / q as f64; q], &ch).unwrap();
            assert!((mi - (q as f64).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_rows_carry_nothing() {
        let ch = ChannelSpec::from_rows(&vec![vec![0.2, 0.3, 0.5]; 4], vec![0.0; 4]).unwrap();
        assert!(mutual_information(&[0.1, 0.2, 0.3, 0.4], &ch).unwrap().abs() < 1e-15);
    }

    #[test]
    fn bsc_uniform_input() {
        let mi = mutual_information(&[0.5, 0.5], &bsc(0.1)).unwrap();
        assert!((mi - (1.0 - h2(0.1))).abs() < 1e-12);
        assert!((mi - 0.53100).abs() < 5e-6);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(ChannelSpec::new(2, 2, vec![1.0, 0.0, 0.5], vec![0.0; 2]), Err(Error::DimensionMismatch(_))));
        assert!(ChannelSpec::new(1, 2, vec![0.6, 0.5], vec![0.0]).is_err());
        assert!(ChannelSpec::new(1, 2, vec![1.5, -0.5], vec![0.0]).is_err());
        assert!(ChannelSpec::new(1, 2, vec![0.5, 0.5], vec![-1.0]).is_err());
        assert!(ChannelSpec::new(1, 2, vec![0.5, 0.5], vec![f64::INFINITY]).is_err());
        let ch = bsc(0.2);
        assert!(matches!(mutual_information(&[1.0], &ch), Err(Error::DimensionMismatch(_))));
        assert!(mutual_information(&[0.7, 0.7], &ch).is_err());
    }

    fn random_channel(q_in: usize, q_out: usize, seed: &[f64]) -> ChannelSpec {
        let rows: Vec<Vec<f64>> = seed
            .chunks(q_out)
            .map(|r| {
                let s: f64 = r.iter().sum();
                r.iter().map(|v| v / s).collect()
            })
            .collect();
        ChannelSpec::from_rows(&rows[..q_in], vec![0.0; q_in]).unwrap()
    }

    fn normalise(v: &[f64]) -> Vec<f64> {
        let s: f64 = v.iter().sum();
        v.iter().map(|x| x / s).collect()
    }

    proptest! {
        #[test]
        fn information_is_concave_in_input(
            entries in prop::collection::vec(0.01f64..1.0, 12),
            a in prop::collection::vec(0.01f64..1.0, 3),
            b in prop::collection::vec(0.01f64..1.0, 3),
            lambda in 0.0f64..1.0,
        ) {
            let ch = random_channel(3, 4, &entries);
            let (pa, pb) = (normalise(&a), normalise(&b));
            let mix: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
            let mix = normalise(&mix);
            let lhs = mutual_information(&mix, &ch).unwrap();
            let rhs = lambda * mutual_information(&pa, &ch).unwrap() + (1.0 - lambda) * mutual_information(&pb, &ch).unwrap();
            prop_assert!(lhs >= rhs - 1e-12);
        }

        #[test]
        fn information_is_bounded(entries in prop::collection::vec(0.0f64..1.0, 9), a in prop::collection::vec(0.01f64..1.0, 3)) {
            prop_assume!(entries.chunks(3).all(|r| r.iter().sum::<f64>() > 1e-3));
            let ch = random_channel(3, 3, &entries);
            let mi = mutual_information(&normalise(&a), &ch).unwrap();
            prop_assert!((0.0..=3f64.log2() + 1e-12).contains(&mi));
        }
    }
}
