use memcap::energy::{synthesize_observations, DEFAULT_A, DEFAULT_B};
use memcap::{fit_energy_model, EnergyCostModel, EnergyObservation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn log_states(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp()).collect()
}

#[test]
fn noiseless_observations_give_exact_parameters() {
    let truth = EnergyCostModel::default();
    let obs: Vec<EnergyObservation> =
        log_states(1e5, 5e6, 48).into_iter().map(|r| EnergyObservation { r, e: truth.cost(r) }).collect();
    let (m, diag) = fit_energy_model(&obs, None).unwrap();
    assert!((m.a / DEFAULT_A - 1.0).abs() < 1e-9, "A = {}", m.a);
    assert!((m.b / DEFAULT_B - 1.0).abs() < 1e-9, "B = {}", m.b);
    assert!(diag.residuals.iter().all(|r| r.abs() < 1e-15));
}

#[test]
fn five_percent_noise_recovers_within_ten_percent() {
    let truth = EnergyCostModel::default();
    let states = log_states(1e5, 5e6, 48);
    let mut passes = 0;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obs = synthesize_observations(&truth, &states, 1, 0.05, &mut rng);
        let (m, _) = fit_energy_model(&obs, None).unwrap();
        if (m.a / DEFAULT_A - 1.0).abs() <= 0.1 && (m.b / DEFAULT_B - 1.0).abs() <= 0.1 {
            passes += 1;
        }
    }
    assert!(passes >= 19, "{passes}/20 fits within 10%");
}

#[test]
fn order_of_observations_is_irrelevant() {
    let truth = EnergyCostModel::new(1e-3, 2e6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut obs = synthesize_observations(&truth, &log_states(5e4, 1e6, 16), 3, 0.02, &mut rng);
    let (a, _) = fit_energy_model(&obs, None).unwrap();
    obs.reverse();
    let (b, _) = fit_energy_model(&obs, None).unwrap();
    assert_eq!((a.a, a.b), (b.a, b.b));
}
