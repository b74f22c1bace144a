use std::collections::BTreeMap;
use std::path::PathBuf;

use memcap::drift::io::{validate_drift_samples, write_drift_samples, DriftIngest};
use memcap::drift::{reference_drift_path, simulate_drift_samples, DriftRng, ReferenceDrift};
use memcap::Error;
use rand::SeedableRng;

use super::{num, quote, write_chart, write_csv};
use crate::config::PipelineConfig;
use crate::error::{config, CliResult};
use crate::layout::{delay_label, Layout};
use crate::plot::{Chart, Series, Style};
use crate::seed::{delay_seed, stage_seed, Stage};

/// Reference-model drift samples in the interchange format: `channel.n`
/// draws per input centroid for each delay. The draws are the ones the
/// `channel` command bins for the same seed.
pub fn drift_simulate(cfg: &PipelineConfig) -> CliResult<Vec<PathBuf>> {
    let root = cfg.require_seed()?;
    let layout = Layout::new(&cfg.out_dir);
    let sampler = ReferenceDrift::new(cfg.drift.reference)?;
    let input = cfg.grids.input()?;
    let channel_seed = stage_seed(root, Stage::Channel);
    let mut samples = Vec::new();
    for &d in &cfg.channel.delays {
        samples.extend(simulate_drift_samples(&sampler, &input, d, cfg.channel.n, delay_seed(channel_seed, d))?);
    }
    let p = layout.drift().join("samples.csv");
    write_drift_samples(&p, &samples)?;
    let mut out = vec![p];

    if cfg.plots {
        let horizon = cfg.channel.delays.iter().copied().fold(0.0, f64::max).ceil().max(1.0) as usize;
        let mut rng = DriftRng::seed_from_u64(stage_seed(root, Stage::Drift));
        let centroids = input.centroids();
        let picks = [0, centroids.len() / 2, centroids.len() - 1];
        let mut series = Vec::new();
        for &k in &picks {
            let path = reference_drift_path(centroids[k], horizon, &cfg.drift.reference, &mut rng)?;
            series.push(Series {
                name: format!("start {:.3e} ohm", centroids[k]),
                points: path.t().iter().copied().zip(path.r().iter().copied()).collect(),
                style: Style::Line,
            });
        }
        let chart = Chart {
            title: "Reference drift paths".into(),
            x_label: "time (min)".into(),
            y_label: "state (ohm)".into(),
            log_x: false,
            series,
        };
        let p = layout.drift().join("drift.svg");
        write_chart(&p, &chart)?;
        out.push(p);
    }
    log::info!("drift-simulate: {} samples", samples.len());
    Ok(out)
}

/// Validates an interchange file. Writes per-delay sample counts and the
/// rejected rows, and fails if any row was rejected.
pub fn drift_ingest(cfg: &PipelineConfig) -> CliResult<Vec<PathBuf>> {
    let layout = Layout::new(&cfg.out_dir);
    let path = cfg
        .paths
        .drift_samples
        .clone()
        .ok_or_else(|| config("drift-ingest needs paths.drift_samples or --samples"))?;
    let DriftIngest { samples, rejected } = validate_drift_samples(&path)?;
    let mut counts: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for s in &samples {
        counts.entry(s.delay.to_bits()).or_insert((s.delay, 0)).1 += 1;
    }
    let mut by_delay: Vec<(f64, usize)> = counts.into_values().collect();
    by_delay.sort_by(|a, b| a.0.total_cmp(&b.0));

    let dir = layout.drift();
    let summary = dir.join("ingest_summary.csv");
    write_csv(&summary, "delay_min,samples", by_delay.iter().map(|(d, n)| format!("{},{n}", num(*d))))?;
    let rejected_path = dir.join("rejected.csv");
    write_csv(&rejected_path, "line,reason", rejected.iter().map(|r| format!("{},{}", r.line, quote(&r.reason))))?;
    log::info!(
        "drift-ingest: {} samples accepted at delays [{}], {} rejected",
        samples.len(),
        by_delay.iter().map(|(d, _)| delay_label(*d)).collect::<Vec<_>>().join(", "),
        rejected.len()
    );
    if let Some(first) = rejected.first().cloned() {
        return Err(Error::MalformedRows { path, count: rejected.len(), first, rows: rejected }.into());
    }
    Ok(vec![summary, rejected_path])
}
