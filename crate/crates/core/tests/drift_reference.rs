//! Statistical checks of the reference drift process and channel estimation.

use memcap::drift::{DriftRng, ReferenceDrift};
use memcap::energy::DEFAULT_B;
use memcap::{estimate_channel, make_grid, reference_drift_sample, EnergyCostModel, ReferenceDriftParams, Result};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn log_mean_matches_analytic_transition() {
    let p = ReferenceDriftParams { reversion_rate: 0.05, volatility: 0.02, equilibrium: DEFAULT_B };
    let (r0, delay, n) = (1e6f64, 50.0, 10_000);
    let draws: Vec<f64> = (0..n).map(|k| reference_drift_sample(r0, delay, &p, k).unwrap().ln()).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let decay = (-0.05f64 * delay).exp();
    let expected = r0.ln() * decay + DEFAULT_B.ln() * (1.0 - decay);
    let se = (var / n as f64).sqrt();
    assert!((mean - expected).abs() < 3.0 * se, "mean {mean} expected {expected} se {se}");
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn median_moves_toward_equilibrium() {
    let p = ReferenceDriftParams::default();
    let target = p.equilibrium.ln();
    let ladder = [0.0, 5.0, 10.0, 20.0, 40.0, 60.0];
    for r0 in [1e5, 3e5, 1e6, 5e7, 1e8] {
        let mut last = f64::INFINITY;
        for (j, &d) in ladder.iter().enumerate() {
            let med = median((0..2001).map(|k| reference_drift_sample(r0, d, &p, 1000 * j as u64 + k).unwrap().ln()).collect());
            let dist = (med - target).abs();
            assert!(dist < last, "r0 {r0} delay {d}: {dist} !< {last}");
            last = dist;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rows_are_distributions_and_reproducible(
        scale in 0.01f64..3.0,
        shift in -1e6f64..1e6,
        q_in in 2usize..30,
        q_out in 2usize..60,
        n in 1usize..200,
        seed in any::<u64>(),
    ) {
        let sampler = move |r: f64, d: f64, rng: &mut DriftRng| -> Result<f64> {
            Ok(r * (scale * rng.random::<f64>() * d.sqrt()).exp() + shift)
        };
        let g_in = make_grid(1e5, 1e6, q_in).unwrap();
        let g_out = make_grid(1e5, 2e7, q_out).unwrap();
        let model = EnergyCostModel::default();
        let a = estimate_channel(&sampler, &g_in, &g_out, 10.0, n, &model, seed).unwrap();
        let b = estimate_channel(&sampler, &g_in, &g_out, 10.0, n, &model, seed).unwrap();
        for x in 0..q_in {
            let row = a.row(x);
            prop_assert!(row.iter().all(|&v| v >= 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
        prop_assert_eq!(a, b);
    }
}

#[test]
fn reference_channel_spreads_with_delay() {
    let g_in = make_grid(1e5, 1e6, 20).unwrap();
    let g_out = make_grid(1e5, 2e7, 50).unwrap();
    let sampler = ReferenceDrift::new(ReferenceDriftParams::default()).unwrap();
    let model = EnergyCostModel::default();
    let short = estimate_channel(&sampler, &g_in, &g_out, 1.0, 2000, &model, 1).unwrap();
    let long = estimate_channel(&sampler, &g_in, &g_out, 100.0, 2000, &model, 1).unwrap();
    let mean_bin = |row: &[f64]| row.iter().enumerate().map(|(k, p)| k as f64 * p).sum::<f64>();
    // After a long delay every input lands near the equilibrium bin.
    let eq_bin = g_out.index(DEFAULT_B) as f64;
    for x in 0..20 {
        assert!((mean_bin(long.row(x)) - eq_bin).abs() < (mean_bin(short.row(x)) - eq_bin).abs());
    }
}
