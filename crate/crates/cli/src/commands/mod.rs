//! One function per subcommand. Each returns the files it wrote.

mod capacity;
mod channel;
mod drift;
mod estimate;
mod fit;
mod pipeline;
mod preprocess;
mod synth;

use std::path::{Path, PathBuf};

pub use capacity::{capacity, capacity_for};
pub use channel::{build_channels, channel, energy_model};
pub use drift::{drift_ingest, drift_simulate};
pub use estimate::estimate_state;
pub use fit::fit_energy;
pub use pipeline::{file_record, manifest_outputs, pipeline, Manifest, OutputRecord, StageRecord, STAGES};
pub use preprocess::preprocess;
pub use synth::synth;

use crate::error::{config, CliError, CliResult};
use crate::plot::Chart;

pub(crate) fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Removes a generated directory so that stale files from an earlier run
/// cannot be picked up by the next stage.
pub(crate) fn reset_dir(dir: &Path) -> CliResult<()> {
    match std::fs::remove_dir_all(dir) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(CliError::io(dir, e)),
    }
}

/// CSV files of a directory in name order, or the path itself if it is a
/// file. Files ending in `_segments.csv` are skipped.
pub(crate) fn csv_inputs(path: &Path) -> CliResult<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_owned()]);
    }
    if !path.is_dir() {
        return Err(config(format!("{} does not exist; run the previous stage first", path.display())));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|e| CliError::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".csv") && !name.ends_with("_segments.csv")
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(config(format!("no CSV files in {}", path.display())));
    }
    Ok(files)
}

pub(crate) fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Shortest text that parses back to the same value.
pub(crate) fn num(x: f64) -> String {
    format!("{x:?}")
}

pub(crate) fn write_chart(path: &Path, chart: &Chart) -> CliResult<()> {
    write_text(path, &chart.to_svg())
}

pub(crate) fn write_csv(path: &Path, header: &str, rows: impl IntoIterator<Item = String>) -> CliResult<()> {
    let mut text = String::from(header);
    text.push('\n');
    for r in rows {
        text.push_str(&r);
        text.push('\n');
    }
    write_text(path, &text)
}

/// Quotes a free-text CSV field.
pub(crate) fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}
