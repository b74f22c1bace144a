use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ChannelSpec;
use crate::error::{invalid, Result};

/// Masses below this are zeroed when a run finishes.
const MASS_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaOptions {
    /// Stopping threshold on the optimality gap, in bits.
    pub tol: f64,
    pub max_iter: usize,
    /// Newton polishing of slow runs; off gives the textbook iteration.
    pub accelerate: bool,
}

impl Default for BaOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 10_000, accelerate: true }
    }
}

impl BaOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(invalid(format!("tol must be finite and > 0, got {}", self.tol)));
        }
        Ok(())
    }
}

/// One point of a capacity-cost curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityCurvePoint {
    pub s: f64,
    /// Expected cost per symbol under `input_distribution`, joules.
    pub avg_energy: f64,
    /// Bits per symbol.
    pub capacity: f64,
    pub input_distribution: Vec<f64>,
    pub iterations: usize,
    /// Upper bound on the remaining objective improvement, bits.
    pub gap: f64,
    pub converged: bool,
}

/// Precomputed per-row negative entropies, in nats.
fn row_neg_entropy(channel: &ChannelSpec) -> Vec<f64> {
    (0..channel.q_in())
        .map(|x| channel.row(x).iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum())
        .collect()
}

struct Tilted<'a> {
    channel: &'a ChannelSpec,
    neg_h: Vec<f64>,
    s: f64,
    q: Vec<f64>,
    ln_q: Vec<f64>,
}

impl Tilted<'_> {
    /// Fills `d` with the tilted divergences at `p` and returns the
    /// objective `I - s E[cost]` in nats. Leaves the output distribution
    /// of `p` in `self.q`.
    fn evaluate(&mut self, p: &[f64], d: &mut [f64]) -> f64 {
        self.q = self.channel.output_distribution(p);
        for (l, &qy) in self.ln_q.iter_mut().zip(&self.q) {
            *l = if qy > 0.0 { qy.ln() } else { 0.0 };
        }
        for (x, dx) in d.iter_mut().enumerate() {
            let cross: f64 = self
                .channel
                .row(x)
                .iter()
                .zip(&self.ln_q)
                .zip(&self.q)
                .filter(|((&pyx, _), &qy)| pyx > 0.0 && qy > 0.0)
                .map(|((&pyx, &l), _)| pyx * l)
                .sum();
            *dx = self.neg_h[x] - cross - self.s * self.channel.costs()[x];
        }
        p.iter().zip(d.iter()).map(|(a, b)| a * b).sum()
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Masses above this take part in a Newton step.
const ACTIVE_MASS: f64 = 1e-10;
const NEWTON_STEPS: usize = 20;
/// Smallest fraction of its mass an input keeps across one Newton step.
const BOUNDARY_FRACTION: f64 = 1e-3;
/// Newton polishing starts after this many plain updates and then runs
/// at doubling intervals.
const FIRST_POLISH: usize = 100;

/// Constrained Newton direction on `active`: maximises the quadratic
/// model of the objective subject to the masses summing to one.
fn newton_direction(tilted: &Tilted<'_>, active: &[usize], d: &[f64]) -> Option<DVector<f64>> {
    let k = active.len();
    let q = &tilted.q;
    let ch = tilted.channel;
    // Negated Hessian of the objective restricted to the active set.
    let mut m = DMatrix::<f64>::zeros(k, k);
    for (i, &a) in active.iter().enumerate() {
        for (j, &b) in active.iter().enumerate().skip(i) {
            let v: f64 = ch
                .row(a)
                .iter()
                .zip(ch.row(b))
                .zip(q)
                .filter(|(_, &qy)| qy > 0.0)
                .map(|((&pa, &pb), &qy)| pa * pb / qy)
                .sum();
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let scale = m.diagonal().max().max(f64::MIN_POSITIVE);
    let g = DVector::from_iterator(k, active.iter().map(|&x| d[x]));
    let ones = DVector::from_element(k, 1.0);
    let mut ridge = 1e-12 * scale;
    while ridge <= scale {
        let mut reg = m.clone();
        for i in 0..k {
            reg[(i, i)] += ridge;
        }
        if let Some(c) = reg.cholesky() {
            let (u, w) = (c.solve(&g), c.solve(&ones));
            let lambda = u.sum() / w.sum();
            return Some(u - w * lambda);
        }
        ridge *= 100.0;
    }
    None
}

/// Newton ascent on the face of the simplex spanned by the inputs that
/// carry mass or violate optimality. Every accepted step increases the
/// objective. Returns the number of steps taken.
fn polish(tilted: &mut Tilted<'_>, p: &mut Vec<f64>, d: &mut Vec<f64>, objective: &mut f64, tol: f64) -> usize {
    let n = p.len();
    let mut trial = vec![0.0; n];
    let mut trial_d = vec![0.0; n];
    let mut steps = 0;
    while steps < NEWTON_STEPS {
        // An input whose mass has decayed to nothing cannot be regrown by
        // Newton steps, which scale with the mass. Mixing towards it is an
        // ascent direction whenever its divergence beats the objective.
        let best = (0..n).max_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap_or(0);
        if p[best] <= ACTIVE_MASS && d[best] > *objective {
            let mut t: f64 = 0.5;
            while t > 1e-12 {
                trial.iter_mut().zip(p.iter()).for_each(|(v, &px)| *v = (1.0 - t) * px);
                trial[best] += t;
                let j = tilted.evaluate(&trial, &mut trial_d);
                if j > *objective {
                    std::mem::swap(p, &mut trial);
                    std::mem::swap(d, &mut trial_d);
                    *objective = j;
                    break;
                }
                t *= 0.5;
            }
            tilted.evaluate(p, &mut trial_d);
        }
        let mut active: Vec<usize> = (0..n).filter(|&x| p[x] > ACTIVE_MASS || d[x] > *objective).collect();
        // Inputs at the boundary that the Newton direction would push
        // further out leave the active set; repeat until none remain.
        let delta = loop {
            if active.len() < 2 {
                break None;
            }
            let Some(delta) = newton_direction(tilted, &active, d) else { break None };
            let before = active.len();
            let keep: Vec<usize> = active
                .iter()
                .zip(delta.iter())
                .filter(|(&x, &dx)| p[x] > ACTIVE_MASS || dx > 0.0)
                .map(|(&x, _)| x)
                .collect();
            if keep.len() == before {
                break Some(delta);
            }
            active = keep;
        };
        let Some(mut delta) = delta else { break };
        // No mass can move by more than one; a near-singular model would
        // otherwise propose steps that backtracking cannot shorten enough.
        let largest = delta.amax();
        if largest > 1.0 {
            delta /= largest;
        }
        // Masses keep a fraction of their value so the iterate stays in the
        // interior, where the optimality certificate is valid.
        let mut t: f64 = 1.0;
        let mut accepted = false;
        while t > 1e-12 {
            trial.copy_from_slice(p);
            for (i, &x) in active.iter().enumerate() {
                trial[x] = (p[x] + t * delta[i]).max(BOUNDARY_FRACTION * p[x]);
            }
            let total: f64 = trial.iter().sum();
            trial.iter_mut().for_each(|v| *v /= total);
            let j = tilted.evaluate(&trial, &mut trial_d);
            if j > *objective {
                std::mem::swap(p, &mut trial);
                std::mem::swap(d, &mut trial_d);
                *objective = j;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // Restore `tilted.q` for the current point.
            tilted.evaluate(p, &mut trial_d);
            break;
        }
        steps += 1;
        if (max_of(d) - *objective) / LN_2 <= tol {
            break;
        }
    }
    steps
}

/// Blahut-Arimoto with a cost tilt; `on_step` sees the objective
/// `I - s E[cost]` (nats) of every accepted iterate.
///
/// With `opts.accelerate`, slow runs are periodically finished off by
/// Newton steps on the current support.
pub(crate) fn run(
    channel: &ChannelSpec,
    s: f64,
    opts: &BaOptions,
    mut on_step: impl FnMut(f64),
) -> Result<CapacityCurvePoint> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(invalid(format!("tilt s must be finite and >= 0, got {s}")));
    }
    opts.validate()?;
    let n = channel.q_in();
    let mut tilted =
        Tilted { channel, neg_h: row_neg_entropy(channel), s, q: Vec::new(), ln_q: vec![0.0; channel.q_out()] };
    let mut p = vec![1.0 / n as f64; n];
    let mut d = vec![0.0; n];
    let mut next_p = vec![0.0; n];
    let mut next_d = vec![0.0; n];
    let mut objective = tilted.evaluate(&p, &mut d);
    let mut iterations = 0;
    let mut next_polish = FIRST_POLISH;
    let (gap, converged) = loop {
        on_step(objective);
        let max = max_of(&d);
        let gap = ((max - objective) / LN_2).max(0.0);
        if gap <= opts.tol {
            break (gap, true);
        }
        if iterations >= opts.max_iter {
            break (gap, false);
        }
        if opts.accelerate && iterations >= next_polish {
            let before = objective;
            iterations += polish(&mut tilted, &mut p, &mut d, &mut objective, opts.tol);
            next_polish = 2 * iterations.max(next_polish);
            if objective > before {
                continue;
            }
        }
        for ((o, &px), &dx) in next_p.iter_mut().zip(&p).zip(&d) {
            *o = px * (dx - max).exp();
        }
        let total: f64 = next_p.iter().sum();
        next_p.iter_mut().for_each(|o| *o /= total);
        let next = tilted.evaluate(&next_p, &mut next_d);
        debug_assert!(
            next >= objective - 1e-12 * (1.0 + objective.abs()),
            "objective decreased from {objective} to {next}"
        );
        std::mem::swap(&mut p, &mut next_p);
        std::mem::swap(&mut d, &mut next_d);
        objective = next;
        iterations += 1;
    };
    for px in p.iter_mut().filter(|px| **px < MASS_FLOOR) {
        *px = 0.0;
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|px| *px /= total);
    let capacity = (channel.information_nats(&p) / LN_2).clamp(0.0, (n as f64).log2());
    let avg_energy = p.iter().zip(channel.costs()).map(|(a, c)| a * c).sum();
    Ok(CapacityCurvePoint { s, avg_energy, capacity, input_distribution: p, iterations, gap, converged })
}

/// Maximises `I(X;Y) - s E[cost]` over input distributions, starting from
/// the uniform distribution. A run that hits `max_iter` is returned with
/// `converged = false`.
pub fn blahut_arimoto(channel: &ChannelSpec, s: f64, opts: &BaOptions) -> Result<CapacityCurvePoint> {
    run(channel, s, opts, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::mutual_information;
    use crate::capacity::tests::{bsc, h2};
    use rand::{Rng, SeedableRng};

    #[test]
    fn bsc_capacity_and_uniform_input() {
        let pt = blahut_arimoto(&bsc(0.1), 0.0, &BaOptions::default()).unwrap();
        assert!(pt.converged);
        assert!((pt.capacity - (1.0 - h2(0.1))).abs() <= 1e-6);
        assert!((pt.input_distribution[0] - 0.5).abs() < 1e-12);
        assert_eq!(pt.avg_energy, 0.0);
    }

    #[test]
    fn erasure_channel() {
        let e = 0.3;
        let ch = ChannelSpec::from_rows(&[vec![1.0 - e, e, 0.0], vec![0.0, e, 1.0 - e]], vec![0.0, 0.0]).unwrap();
        let pt = blahut_arimoto(&ch, 0.0, &BaOptions::default()).unwrap();
        assert!((pt.capacity - 0.7).abs() <= 1e-6);
    }

    #[test]
    fn asymmetric_channel_gap_bounds_error() {
        // Z-channel with crossover 0.5 has capacity log2(5/4).
        let ch = ChannelSpec::from_rows(&[vec![1.0, 0.0], vec![0.5, 0.5]], vec![0.0, 0.0]).unwrap();
        let pt = blahut_arimoto(&ch, 0.0, &BaOptions { tol: 1e-9, max_iter: 100_000, ..Default::default() }).unwrap();
        assert!(pt.converged);
        assert!((pt.capacity - 1.25f64.log2()).abs() <= 1e-9);
        assert!((pt.input_distribution[1] - 0.4).abs() < 1e-4);
    }

    #[test]
    fn large_tilt_concentrates_on_cheapest_symbol() {
        let ch = ChannelSpec::from_rows(
            &[vec![0.9, 0.05, 0.05], vec![0.05, 0.9, 0.05], vec![0.05, 0.05, 0.9]],
            vec![0.5, 0.1, 0.8],
        )
        .unwrap();
        let pt = blahut_arimoto(&ch, 1e12, &BaOptions::default()).unwrap();
        assert!(pt.input_distribution[1] > 1.0 - 1e-6);
        assert!(pt.capacity < 1e-6);
        assert!((pt.avg_energy - 0.1).abs() < 1e-6);
    }

    #[test]
    fn unconverged_runs_are_flagged() {
        let ch = ChannelSpec::from_rows(&[vec![1.0, 0.0], vec![0.5, 0.5]], vec![0.0, 0.0]).unwrap();
        let pt = blahut_arimoto(&ch, 0.0, &BaOptions { tol: 1e-12, max_iter: 2, accelerate: false }).unwrap();
        assert!(!pt.converged);
        assert_eq!(pt.iterations, 2);
        assert!(pt.gap > 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        let ch = bsc(0.1);
        assert!(blahut_arimoto(&ch, -1.0, &BaOptions::default()).is_err());
        assert!(blahut_arimoto(&ch, f64::NAN, &BaOptions::default()).is_err());
        assert!(blahut_arimoto(&ch, 0.0, &BaOptions { tol: 0.0, ..Default::default() }).is_err());
    }

    fn random_channel(rng: &mut impl Rng, q: usize) -> ChannelSpec {
        let rows: Vec<Vec<f64>> = (0..q)
            .map(|_| {
                let r: Vec<f64> = (0..q).map(|_| rng.random_range(0.01..1.0)).collect();
                let s: f64 = r.iter().sum();
                r.into_iter().map(|v| v / s).collect()
            })
            .collect();
        ChannelSpec::from_rows(&rows, (0..q).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn polish_regrows_a_vanished_input() {
        let ch = ChannelSpec::from_rows(
            &[vec![0.5, 0.5, 0.0], vec![0.4, 0.6, 0.0], vec![0.0, 0.0, 1.0]],
            vec![0.0; 3],
        )
        .unwrap();
        let mut tilted =
            Tilted { channel: &ch, neg_h: row_neg_entropy(&ch), s: 0.0, q: Vec::new(), ln_q: vec![0.0; 3] };
        let mut p = vec![0.5, 0.5, 1e-200];
        let mut d = vec![0.0; 3];
        let mut objective = tilted.evaluate(&p, &mut d);
        let start = objective;
        assert!(polish(&mut tilted, &mut p, &mut d, &mut objective, 1e-9) > 0);
        assert!(objective > start + 0.1);
        assert!(p[2] > 0.1, "{p:?}");
    }

    #[test]
    fn objective_never_decreases() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let ch = random_channel(&mut rng, 6);
            let s = rng.random_range(0.0..3.0);
            for accelerate in [false, true] {
                let mut history = Vec::new();
                run(&ch, s, &BaOptions { tol: 1e-10, max_iter: 5000, accelerate }, |j| history.push(j)).unwrap();
                assert!(history.windows(2).all(|w| w[1] >= w[0] - 1e-13), "{history:?}");
            }
        }
    }

    #[test]
    fn permuting_inputs_permutes_the_optimum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let ch = random_channel(&mut rng, 4);
        let perm = [2usize, 0, 3, 1];
        let rows: Vec<Vec<f64>> = perm.iter().map(|&x| ch.row(x).to_vec()).collect();
        let permuted = ChannelSpec::from_rows(&rows, perm.iter().map(|&x| ch.costs()[x]).collect()).unwrap();
        let opts = BaOptions { tol: 1e-9, max_iter: 100_000, ..Default::default() };
        for s in [0.0, 0.3, 2.0] {
            let a = blahut_arimoto(&ch, s, &opts).unwrap();
            let b = blahut_arimoto(&permuted, s, &opts).unwrap();
            assert!((a.capacity - b.capacity).abs() < 1e-8);
            assert!((a.avg_energy - b.avg_energy).abs() < 1e-6);
            for (k, &x) in perm.iter().enumerate() {
                assert!((b.input_distribution[k] - a.input_distribution[x]).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn uniform_cost_shift_only_moves_energy() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let ch = random_channel(&mut rng, 3);
        let c = 0.75;
        let rows: Vec<Vec<f64>> = (0..3).map(|x| ch.row(x).to_vec()).collect();
        let shifted = ChannelSpec::from_rows(&rows, ch.costs().iter().map(|v| v + c).collect()).unwrap();
        let opts = BaOptions { tol: 1e-10, max_iter: 100_000, ..Default::default() };
        for s in [0.0, 0.5, 1.5] {
            let a = blahut_arimoto(&ch, s, &opts).unwrap();
            let b = blahut_arimoto(&shifted, s, &opts).unwrap();
            assert!((b.avg_energy - c - a.avg_energy).abs() < 1e-9);
            assert!((a.capacity - b.capacity).abs() < 1e-9);
        }
    }

    #[test]
    fn reported_capacity_matches_distribution() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let ch = random_channel(&mut rng, 5);
        let pt = blahut_arimoto(&ch, 0.4, &BaOptions::default()).unwrap();
        assert!((mutual_information(&pt.input_distribution, &ch).unwrap() - pt.capacity).abs() < 1e-15);
        assert!((pt.input_distribution.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
