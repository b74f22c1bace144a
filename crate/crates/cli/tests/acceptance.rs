//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero if any failed. Runs without the libtest harness so the report
//! is always visible.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use memcap::device::estimate_state_with_eps;
use memcap::drift::{DriftRng, ReferenceDrift};
use memcap::signal::{correct_offset, synthesize_waveform, AlignmentConfig, WaveformKind, WaveformSchedule};
use memcap::{
    blahut_arimoto, delay_sweep, estimate_channel, estimate_state, fit_energy_model, make_grid, memristor_current,
    mutual_information, BaOptions, ChannelSpec, DeviceParams, EnergyCostModel, EnergyObservation,
    ReferenceDriftParams, SGrid, VITrace,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_time(outcome: Outcome, elapsed: Duration, limit: Duration) -> Outcome {
    let stamp = |d: String| format!("{d}; {:.2} s (limit {} s)", elapsed.as_secs_f64(), limit.as_secs());
    match outcome {
        Ok(d) if elapsed <= limit => Ok(stamp(d)),
        Ok(d) | Err(d) => Err(stamp(d)),
    }
}

fn h2(p: f64) -> f64 {
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

fn analytic_channels() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    let cases = [
        ("BSC(0.1)", ChannelSpec::from_rows(&[vec![0.9, 0.1], vec![0.1, 0.9]], vec![0.0; 2]).unwrap(), 1.0 - h2(0.1)),
        (
            "BEC(0.3)",
            ChannelSpec::from_rows(&[vec![0.7, 0.3, 0.0], vec![0.0, 0.3, 0.7]], vec![0.0; 2]).unwrap(),
            0.7,
        ),
    ];
    for (name, ch, exact) in cases {
        let start = Instant::now();
        let pt = blahut_arimoto(&ch, 0.0, &BaOptions::default()).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        let err = (pt.capacity - exact).abs();
        ok &= err < 1e-4 && elapsed < Duration::from_secs(1);
        details.push(format!("{name} {:.6} bits (error {err:.1e}, {:.1} ms)", pt.capacity, elapsed.as_secs_f64() * 1e3));
    }
    check(ok, details.join(", "))
}

/// Best information on the simplex grid with step `1/steps` among
/// distributions whose expected cost does not exceed `budget`.
fn simplex_search(ch: &ChannelSpec, budget: f64, steps: usize) -> f64 {
    let mut best: f64 = 0.0;
    for a in 0..=steps {
        for b in 0..=steps - a {
            let p = [a as f64 / steps as f64, b as f64 / steps as f64, (steps - a - b) as f64 / steps as f64];
            let cost: f64 = p.iter().zip(ch.costs()).map(|(x, c)| x * c).sum();
            if cost <= budget + 1e-12 {
                best = best.max(mutual_information(&p, ch).unwrap());
            }
        }
    }
    best
}

fn brute_force_comparison() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let r: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
                let s: f64 = r.iter().sum();
                r.into_iter().map(|v| v / s).collect()
            })
            .collect();
        let costs = (0..3).map(|_| rng.random::<f64>()).collect();
        let ch = ChannelSpec::from_rows(&rows, costs).map_err(|e| e.to_string())?;
        for s in [0.0, 0.2, 0.5, 1.0, 3.0] {
            let pt = blahut_arimoto(&ch, s, &BaOptions::default()).map_err(|e| e.to_string())?;
            let brute = simplex_search(&ch, pt.avg_energy, 200);
            worst = worst.max((pt.capacity - brute).abs());
        }
    }
    check(worst < 5e-3, format!("25 points, largest difference {worst:.2e} bits (limit 5e-3)"))
}

const A: f64 = 0.000239506;
const B: f64 = 7.1853e6;

fn energy_fit_recovery() -> Outcome {
    let mut passes = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let obs: Vec<EnergyObservation> = (0..48)
            .map(|k| {
                let r = 1e5 * 50f64.powf(k as f64 / 47.0);
                let noise: f64 = rng.sample(StandardNormal);
                EnergyObservation { r, e: A * (B / r).ln() * (1.0 + 0.05 * noise) }
            })
            .collect();
        let (m, _) = fit_energy_model(&obs, None).map_err(|e| e.to_string())?;
        if (m.a / A - 1.0).abs() < 0.1 && (m.b / B - 1.0).abs() < 0.1 {
            passes += 1;
        }
    }
    check(passes >= 19, format!("{passes}/20 trials within 10% of A and B"))
}

fn read_trace(x: f64, amplitude: f64, fs: f64, p: &DeviceParams) -> VITrace {
    let schedule = WaveformSchedule { a_read: amplitude, ..Default::default() };
    let v = synthesize_waveform(WaveformKind::Read, &schedule, fs).unwrap();
    let t = (0..v.len()).map(|k| k as f64 / fs).collect();
    let i = v.iter().map(|&vn| memristor_current(x, vn, p).unwrap()).collect();
    VITrace::new(t, v, i).unwrap()
}

/// Plain mean of `i / g(v)` over the same samples the weighted estimator uses.
fn uniform_estimate(trace: &VITrace, p: &DeviceParams) -> f64 {
    let w = memcap::device::estimation_weights(trace.v(), p, 1e-12).unwrap();
    let sum: f64 = w.indices.iter().map(|&n| trace.i()[n] / p.conductance_term(trace.v()[n])).sum();
    sum / w.indices.len() as f64
}

fn state_estimator() -> Outcome {
    let p = DeviceParams::default();
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let x = 1e-8 * 10f64.powf(6.0 * k as f64 / 19.0);
        let est = estimate_state(&read_trace(x, 0.1, 1e5, &p), &p).map_err(|e| e.to_string())?;
        worst = worst.max(((est.x - x) / x).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (trials, draws) = (1000, 20);
    let mut wins = 0;
    for _ in 0..trials {
        let x = 10f64.powf(rng.random_range(-8.0..-2.0));
        let clean = read_trace(x, rng.random_range(0.05..0.2), 1e5, &p);
        // 20 dB: noise power is one hundredth of the signal power.
        let power = clean.i().iter().map(|i| i * i).sum::<f64>() / clean.len() as f64;
        let sigma = (power / 100.0).sqrt();
        let (mut mse_w, mut mse_u) = (0.0, 0.0);
        for _ in 0..draws {
            let i: Vec<f64> = clean.i().iter().map(|&i| i + sigma * rng.sample::<f64, _>(StandardNormal)).collect();
            let noisy = VITrace::new(clean.t().to_vec(), clean.v().to_vec(), i).unwrap();
            let w = estimate_state_with_eps(&noisy, &p, 1e-12).map_or(f64::NAN, |e| e.x);
            mse_w += (w - x).powi(2);
            mse_u += (uniform_estimate(&noisy, &p) - x).powi(2);
        }
        if mse_w <= mse_u {
            wins += 1;
        }
    }
    check(
        worst < 1e-10 && wins * 100 >= 95 * trials,
        format!("noiseless worst relative error {worst:.1e}; weighted MSE <= uniform in {wins}/{trials} trials"),
    )
}

fn offset_correction() -> Outcome {
    let p = DeviceParams::default();
    let cfg = AlignmentConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    // Offsets show only through samples that land in the wrong quadrant,
    // so the trace is sampled finely next to the injected offsets.
    let fs = 1e7;
    let mut recovered = 0;
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let amp = rng.random_range(0.05..0.2);
        let clean = if case % 2 == 0 {
            let mut t = read_trace(0.0, amp, fs, &p);
            let r = 10f64.powf(rng.random_range(5.0..7.0));
            t = VITrace::new(t.t().to_vec(), t.v().to_vec(), t.v().iter().map(|v| v / r).collect()).unwrap();
            t
        } else {
            read_trace(10f64.powf(rng.random_range(-7.0..-5.0)), amp, fs, &p)
        };
        let amp_i = clean.i().iter().fold(0.0f64, |m, i| m.max(i.abs()));
        let dv = rng.random_range(-0.05..0.05) * amp;
        let di = rng.random_range(-0.05..0.05) * amp_i;
        let c = correct_offset(&clean.with_offsets(dv, di), &cfg).map_err(|e| e.to_string())?;
        let err = ((c.dv + dv).abs() / amp).max((c.di + di).abs() / amp_i);
        worst = worst.max(err);
        if err <= 0.01 {
            recovered += 1;
        }
    }
    check(recovered == 50, format!("{recovered}/50 cases within 1% of amplitude (worst {:.3}%)", worst * 100.0))
}

fn channel_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let model = EnergyCostModel::default();
    let mut worst: f64 = 0.0;
    let mut identical = true;
    for k in 0..100 {
        let q_in = rng.random_range(2..30);
        let q_out = rng.random_range(2..40);
        let g_in = make_grid(1e5, 1e6, q_in).unwrap();
        let g_out = make_grid(1e5, rng.random_range(2e6..3e7), q_out).unwrap();
        let delay = rng.random_range(0.1..200.0);
        let n = rng.random_range(10..300);
        let seed = rng.random::<u64>();
        let (a, b) = if k % 2 == 0 {
            let params = ReferenceDriftParams {
                equilibrium: 10f64.powf(rng.random_range(5.0..7.5)),
                reversion_rate: rng.random_range(0.001..0.5),
                volatility: rng.random_range(0.01..1.0),
            };
            let s = ReferenceDrift(params);
            (
                estimate_channel(&s, &g_in, &g_out, delay, n, &model, seed),
                estimate_channel(&s, &g_in, &g_out, delay, n, &model, seed),
            )
        } else {
            let spread = rng.random_range(0.01..2.0);
            let s = move |r: f64, d: f64, rng: &mut DriftRng| {
                let step = LogNormal::new(0.0, spread * (d / 100.0).sqrt()).unwrap();
                Ok(r * step.sample(rng))
            };
            (
                estimate_channel(&s, &g_in, &g_out, delay, n, &model, seed),
                estimate_channel(&s, &g_in, &g_out, delay, n, &model, seed),
            )
        };
        let (a, b) = (a.map_err(|e| e.to_string())?, b.map_err(|e| e.to_string())?);
        for x in 0..a.input_grid.q() {
            worst = worst.max((a.row(x).iter().sum::<f64>() - 1.0).abs());
        }
        identical &= a.p.len() == b.p.len() && a.p.iter().zip(&b.p).all(|(u, v)| u.to_bits() == v.to_bits());
    }
    check(
        worst <= 1e-9 && identical,
        format!("100 samplers, largest row-sum error {worst:.1e}, repeat runs bit-identical: {identical}"),
    )
}

fn end_to_end_curves() -> Outcome {
    let params = ReferenceDriftParams { equilibrium: 7.1853e6, reversion_rate: 0.05, volatility: 0.1 };
    let sampler = ReferenceDrift(params);
    let g_in = make_grid(1e5, 1e6, 100).unwrap();
    let g_out = make_grid(1e5, 2e7, 100).unwrap();
    let model = EnergyCostModel::default();
    let channels = [10.0, 50.0, 100.0]
        .iter()
        .enumerate()
        .map(|(k, &d)| estimate_channel(&sampler, &g_in, &g_out, d, 1000, &model, 100 + k as u64))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let s = SGrid::default().values().unwrap();
    let curves = delay_sweep(&channels, &s, &BaOptions::default()).map_err(|e| e.to_string())?;
    let mut worst_drop: f64 = 0.0;
    let mut unconverged = 0;
    for c in &curves {
        for w in c.points.windows(2) {
            worst_drop = worst_drop.max(w[0].capacity - w[1].capacity);
        }
        unconverged += c.points.iter().filter(|p| !p.converged).count();
    }
    let maxima: Vec<f64> = curves.iter().map(|c| c.max_capacity()).collect();
    let bound = 100f64.log2();
    let ordered = maxima[0] >= maxima[1] && maxima[1] >= maxima[2];
    let bounded = curves.iter().flat_map(|c| &c.points).all(|p| p.capacity <= bound);
    check(
        worst_drop <= 1e-6 && ordered && bounded,
        format!(
            "max C(10, 50, 100) = {:.4}, {:.4}, {:.4} bits; largest drop along a curve {:.1e}; all <= {bound:.3}: {bounded}; unconverged points {unconverged}",
            maxima[0], maxima[1], maxima[2], worst_drop.max(0.0)
        ),
    )
}

fn output_csvs(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_owned()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "csv") {
                out.insert(path.strip_prefix(root).unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn pipeline_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |name: &str| -> Result<BTreeMap<String, Vec<u8>>, String> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_memcap"))
            .args(["pipeline", "--seed", "2024", "-q", "--out-dir"])
            .arg(&out)
            .env_remove("MEMCAP_CONFIG")
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("pipeline exited with {status}"));
        }
        Ok(output_csvs(&out))
    };
    let (first, second) = (run("first")?, run("second")?);
    let differing: Vec<&String> = first.keys().filter(|k| first.get(*k) != second.get(*k)).collect();
    check(
        !first.is_empty() && differing.is_empty() && first.len() == second.len(),
        format!("{} CSV files, {} differ between runs", first.len(), differing.len()),
    )
}

const CRITERIA: usize = 8;

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, u64);
    let criteria: [Criterion; CRITERIA] = [
        ("BA matches closed-form BSC and BEC capacities", analytic_channels, 2),
        ("cost-constrained BA matches exhaustive simplex search", brute_force_comparison, 30),
        ("energy model fit recovers generating parameters", energy_fit_recovery, 5),
        ("state estimator is exact and beats uniform weighting", state_estimator, 60),
        ("offset correction recovers injected offsets", offset_correction, 60),
        ("channel rows sum to one and are seed-reproducible", channel_invariants, 60),
        ("end-to-end capacity-cost curves are monotone, ordered and bounded", end_to_end_curves, 300),
        ("pipeline output is byte-identical across runs", pipeline_determinism, 600),
    ];
    let mut failed = Vec::new();
    for (k, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let outcome = within_time(outcome, start.elapsed(), Duration::from_secs(limit));
        match outcome {
            Ok(d) => println!("PASS {}. {name}: {d}", k + 1),
            Err(d) => {
                println!("FAIL {}. {name}: {d}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all {CRITERIA} criteria passed");
}
