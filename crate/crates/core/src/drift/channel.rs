use rand::SeedableRng;
use rayon::prelude::*;

use crate::capacity::ChannelSpec;
use crate::drift::{DriftRng, DriftSample, DriftSampler, QuantisationGrid};
use crate::energy::EnergyCostModel;
use crate::error::{invalid, Error, Result};

/// Discrete drift channel for one delay: a row-stochastic `q_in x q_out`
/// matrix with the energy cost of each input symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftChannelMatrix {
    /// Minutes.
    pub delay: f64,
    pub input_grid: QuantisationGrid,
    pub output_grid: QuantisationGrid,
    /// Row-major transition probabilities.
    pub p: Vec<f64>,
    /// Joules per input symbol.
    pub costs: Vec<f64>,
    pub samples_per_input: usize,
    pub seed: Option<u64>,
}

impl DriftChannelMatrix {
    pub fn q_in(&self) -> usize {
        self.input_grid.q()
    }

    pub fn q_out(&self) -> usize {
        self.output_grid.q()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let q = self.q_out();
        &self.p[x * q..(x + 1) * q]
    }

    pub fn validate(&self) -> Result<()> {
        self.to_channel_spec().map(|_| ())
    }

    pub fn to_channel_spec(&self) -> Result<ChannelSpec> {
        ChannelSpec::new(self.q_in(), self.q_out(), self.p.clone(), self.costs.clone())
    }
}

fn row_from_counts(counts: &[u64], total: u64) -> Vec<f64> {
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Independent random stream for input level `index`.
pub(crate) fn row_rng(seed: u64, index: usize) -> DriftRng {
    let mut rng = DriftRng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Draws `n` states for input level `index` from its own stream.
fn draw_row<S: DriftSampler + ?Sized>(
    sampler: &S,
    index: usize,
    r0: f64,
    delay: f64,
    n: usize,
    seed: u64,
    mut sink: impl FnMut(f64),
) -> Result<()> {
    let mut rng = row_rng(seed, index);
    for _ in 0..n {
        let r = sampler.sample(r0, delay, &mut rng).map_err(|e| Error::Sampler { index, source: Box::new(e) })?;
        if !r.is_finite() {
            return Err(Error::Sampler { index, source: Box::new(invalid(format!("sampler returned {r}"))) });
        }
        sink(r);
    }
    Ok(())
}

/// Estimates `P(R_hat | R, D = delay)` from `n` sampler draws per input
/// centroid. Each input level uses its own stream derived from
/// `(seed, index)`, so the result does not depend on thread scheduling.
pub fn estimate_channel<S: DriftSampler + ?Sized>(
    sampler: &S,
    input_grid: &QuantisationGrid,
    output_grid: &QuantisationGrid,
    delay: f64,
    n: usize,
    energy_model: &EnergyCostModel,
    seed: u64,
) -> Result<DriftChannelMatrix> {
    if n == 0 {
        return Err(invalid("need at least one sample per input level"));
    }
    if !(delay.is_finite() && delay >= 0.0) {
        return Err(invalid(format!("delay must be finite and >= 0, got {delay}")));
    }
    energy_model.validate()?;
    let rows: Vec<Vec<f64>> = input_grid
        .centroids()
        .par_iter()
        .enumerate()
        .map(|(index, &r0)| {
            let mut counts = vec![0u64; output_grid.q()];
            draw_row(sampler, index, r0, delay, n, seed, |r| counts[output_grid.index(r)] += 1)?;
            Ok(row_from_counts(&counts, n as u64))
        })
        .collect::<Result<_>>()?;
    Ok(DriftChannelMatrix {
        delay,
        input_grid: input_grid.clone(),
        output_grid: output_grid.clone(),
        p: rows.concat(),
        costs: input_grid.centroids().iter().map(|&r| energy_model.cost(r)).collect(),
        samples_per_input: n,
        seed: Some(seed),
    })
}

/// Exports `n` draws per input centroid in the interchange format, input
/// level by input level. The draws are the ones [`estimate_channel`] bins for
/// the same `seed`.
pub fn simulate_drift_samples<S: DriftSampler + ?Sized>(
    sampler: &S,
    input_grid: &QuantisationGrid,
    delay: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<DriftSample>> {
    if !(delay.is_finite() && delay >= 0.0) {
        return Err(invalid(format!("delay must be finite and >= 0, got {delay}")));
    }
    let rows: Vec<Vec<DriftSample>> = input_grid
        .centroids()
        .par_iter()
        .enumerate()
        .map(|(index, &r0)| {
            let mut row = Vec::with_capacity(n);
            draw_row(sampler, index, r0, delay, n, seed, |r| row.push(DriftSample { r_init: r0, delay, r_final: r }))?;
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(rows.concat())
}

/// Builds the channel for `delay` from externally generated samples,
/// binning each sample's initial state on the input grid. Every input bin
/// must receive at least one sample.
pub fn channel_from_samples(
    samples: &[DriftSample],
    input_grid: &QuantisationGrid,
    output_grid: &QuantisationGrid,
    delay: f64,
    energy_model: &EnergyCostModel,
) -> Result<DriftChannelMatrix> {
    energy_model.validate()?;
    let tol = 1e-9 * delay.abs().max(1.0);
    let mut counts = vec![0u64; input_grid.q() * output_grid.q()];
    let mut totals = vec![0u64; input_grid.q()];
    for s in samples.iter().filter(|s| (s.delay - delay).abs() <= tol) {
        s.validate()?;
        let x = input_grid.index(s.r_init);
        counts[x * output_grid.q() + output_grid.index(s.r_final)] += 1;
        totals[x] += 1;
    }
    if let Some(index) = totals.iter().position(|&t| t == 0) {
        return Err(Error::EmptyInputBin { index, delay });
    }
    let p = counts
        .chunks(output_grid.q())
        .zip(&totals)
        .flat_map(|(c, &t)| row_from_counts(c, t))
        .collect();
    Ok(DriftChannelMatrix {
        delay,
        input_grid: input_grid.clone(),
        output_grid: output_grid.clone(),
        p,
        costs: input_grid.centroids().iter().map(|&r| energy_model.cost(r)).collect(),
        samples_per_input: totals.iter().copied().min().unwrap_or(0) as usize,
        seed: None,
    })
}
