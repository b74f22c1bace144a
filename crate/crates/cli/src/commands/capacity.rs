use std::path::PathBuf;

use memcap::capacity::io::{write_curves, write_distributions};
use memcap::drift::io::read_channel;
use memcap::{capacity_cost_curve, DelayCurve, DriftChannelMatrix};

use super::{csv_inputs, num, quote, write_chart, write_csv};
use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult, WithContext};
use crate::layout::{delay_label, Layout};
use crate::plot::{Chart, Series, Style};

/// Capacity-cost curves for every channel. Channels come from
/// `paths.channels` if set and are built from the drift source otherwise.
pub fn capacity(cfg: &PipelineConfig) -> CliResult<Vec<PathBuf>> {
    let channels = match &cfg.paths.channels {
        Some(dir) => {
            let mut v = csv_inputs(dir)?
                .iter()
                .map(|f| read_channel(f).context(f.display()))
                .collect::<CliResult<Vec<_>>>()?;
            v.sort_by(|a, b| a.delay.total_cmp(&b.delay));
            v
        }
        None => super::build_channels(cfg)?,
    };
    capacity_for(cfg, &channels)
}

/// Runs every delay independently; a failing delay is reported in the
/// summary and does not stop the others.
pub fn capacity_for(cfg: &PipelineConfig, channels: &[DriftChannelMatrix]) -> CliResult<Vec<PathBuf>> {
    let layout = Layout::new(&cfg.out_dir);
    let dir = layout.capacity();
    let s = cfg.capacity.s_grid.values()?;
    let mut out = Vec::new();
    let mut summary = Vec::new();
    let mut curves = Vec::new();
    let mut first_error: Option<CliError> = None;

    for m in channels {
        let label = delay_label(m.delay);
        let result = m
            .to_channel_spec()
            .and_then(|spec| capacity_cost_curve(&spec, &s, &cfg.capacity.ba))
            .context(format!("delay {label} min"));
        match result {
            Ok(points) => {
                let curve = DelayCurve { delay: m.delay, points };
                let p = dir.join(format!("curve_d{label}.csv"));
                write_curves(&p, std::slice::from_ref(&curve))?;
                out.push(p);
                if cfg.capacity.write_distributions {
                    let p = dir.join(format!("distributions_d{label}.csv"));
                    write_distributions(&p, std::slice::from_ref(&curve))?;
                    out.push(p);
                }
                let best = curve.points.iter().max_by(|a, b| a.capacity.total_cmp(&b.capacity));
                let converged = curve.points.iter().filter(|p| p.converged).count();
                summary.push(format!(
                    "{},{},{},{},{converged},ok,",
                    num(m.delay),
                    best.map_or("".into(), |b| num(b.capacity)),
                    best.map_or("".into(), |b| num(b.avg_energy)),
                    curve.points.len(),
                ));
                if converged < curve.points.len() {
                    log::warn!("delay {label} min: {} points hit the iteration cap", curve.points.len() - converged);
                }
                curves.push(curve);
            }
            Err(e) => {
                log::error!("{e}");
                summary.push(format!("{},,,0,0,failed,{}", num(m.delay), quote(&e.to_string())));
                first_error.get_or_insert(e);
            }
        }
    }
    let p = dir.join("summary.csv");
    write_csv(&p, "delay_min,max_capacity_bits,avg_energy_at_max_j,points,converged_points,status,error", summary)?;
    out.push(p);

    if cfg.plots && !curves.is_empty() {
        let chart = Chart {
            title: "Capacity-cost curves".into(),
            x_label: "average energy (J)".into(),
            y_label: "capacity (bits)".into(),
            log_x: false,
            series: curves
                .iter()
                .map(|c| Series {
                    name: format!("delay {} min", delay_label(c.delay)),
                    points: c.points.iter().map(|p| (p.avg_energy, p.capacity)).collect(),
                    style: Style::Line,
                })
                .collect(),
        };
        let p = dir.join("capacity.svg");
        write_chart(&p, &chart)?;
        out.push(p);
    }
    for c in &curves {
        log::info!("capacity: delay {} min, max {:.4} bits", delay_label(c.delay), c.max_capacity());
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
