use std::path::PathBuf;

use memcap::energy::io::{read_observations, write_fit_summary, write_residuals};
use memcap::fit_energy_model;

use super::{write_chart, write_text};
use crate::config::PipelineConfig;
use crate::error::{config, CliError, CliResult, WithContext};
use crate::layout::Layout;
use crate::plot::{Chart, Series, Style};

/// Least-squares fit of the energy cost model. Writes the summary table,
/// per-point residuals and the model as JSON for the channel stage.
pub fn fit_energy(cfg: &PipelineConfig) -> CliResult<Vec<PathBuf>> {
    let layout = Layout::new(&cfg.out_dir);
    let path = cfg.paths.observations.clone().unwrap_or_else(|| layout.observations());
    if !path.is_file() {
        return Err(config(format!("no observations at {}; run estimate-state or set paths.observations", path.display())));
    }
    let obs = read_observations(&path)?;
    let (model, diag) = fit_energy_model(&obs, None).context(path.display())?;
    let dir = layout.fit();
    let summary = dir.join("summary.csv");
    write_fit_summary(&summary, &model, &diag)?;
    let residuals = dir.join("residuals.csv");
    write_residuals(&residuals, &obs, &model)?;
    let json = layout.fitted_model();
    let text = serde_json::to_string_pretty(&model).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_text(&json, &(text + "\n"))?;
    let mut out = vec![summary, residuals, json];

    if cfg.plots {
        let (lo, hi) = obs.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), o| (lo.min(o.r), hi.max(o.r)));
        let curve = (0..=100)
            .map(|k| {
                let r = lo * (hi / lo).powf(k as f64 / 100.0);
                (r, model.cost(r))
            })
            .collect();
        let chart = Chart {
            title: "SET energy against programmed state".into(),
            x_label: "state (ohm)".into(),
            y_label: "energy (J)".into(),
            log_x: true,
            series: vec![
                Series { name: "observed".into(), points: obs.iter().map(|o| (o.r, o.e)).collect(), style: Style::Markers },
                Series { name: "fitted cost".into(), points: curve, style: Style::Line },
            ],
        };
        let p = dir.join("fit.svg");
        write_chart(&p, &chart)?;
        out.push(p);
    }
    log::info!("fit-energy: A = {:e} J, B = {:e} ohm, rss = {:e}", model.a, model.b, diag.rss);
    Ok(out)
}
