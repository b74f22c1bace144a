use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::channel::write_channels;
use super::{build_channels, capacity_for, estimate_state, fit_energy, preprocess, synth, write_text};
use crate::config::{InputPaths, PipelineConfig};
use crate::error::{CliError, CliResult};
use crate::layout::Layout;
use crate::seed::{stage_seed, Stage};

/// Stage names in execution order.
pub const STAGES: [&str; 6] = ["synth", "preprocess", "estimate-state", "fit-energy", "channel", "capacity"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    /// Seed handed to the stage, if it draws random numbers.
    pub seed: Option<u64>,
    pub outputs: Vec<OutputRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    /// SHA-256 of `config`, the configuration the run executed.
    pub config_sha256: String,
    pub config: String,
    pub seed: u64,
    pub completed: Vec<StageRecord>,
    pub failed_stage: Option<String>,
    pub error: Option<String>,
}

impl Manifest {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
    }

    fn write(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Runtime(e.to_string()))?;
        write_text(path, &(text + "\n"))
    }
}

pub fn file_record(layout: &Layout, path: &Path) -> CliResult<OutputRecord> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(OutputRecord {
        path: layout.relative(path),
        sha256: hex::encode(Sha256::digest(&bytes)),
        bytes: bytes.len() as u64,
    })
}

/// Runs the six stages in order, each reading the previous stage's files.
///
/// Input paths in the configuration are ignored: every stage reads what the
/// previous one wrote. The executed configuration is saved as `config.toml`
/// next to `manifest.json`, which is rewritten after every stage so that a
/// failed run still lists the stages that completed.
pub fn pipeline(cfg: &PipelineConfig) -> CliResult<Manifest> {
    let root = cfg.require_seed()?;
    let mut cfg = cfg.clone();
    let drift_samples = cfg.paths.drift_samples.take();
    if cfg.paths != InputPaths::default() {
        log::warn!("pipeline: ignoring input paths; stages read the outputs of earlier stages");
    }
    cfg.paths = InputPaths { drift_samples, ..InputPaths::default() };

    let layout = Layout::new(&cfg.out_dir);
    let config_text = cfg.to_toml()?;
    write_text(&layout.effective_config(), &config_text)?;
    let mut manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config_sha256: cfg.hash()?,
        config: layout.relative(&layout.effective_config()),
        seed: root,
        completed: Vec::new(),
        failed_stage: None,
        error: None,
    };
    manifest.write(&layout.manifest())?;

    let mut channels = Vec::new();
    for name in STAGES {
        log::info!("pipeline: {name}");
        let seed = match name {
            "synth" => Some(stage_seed(root, Stage::Synth)),
            "channel" => Some(stage_seed(root, Stage::Channel)),
            _ => None,
        };
        let result = match name {
            "synth" => synth(&cfg),
            "preprocess" => preprocess(&cfg),
            "estimate-state" => estimate_state(&cfg),
            "fit-energy" => fit_energy(&cfg),
            "channel" => build_channels(&cfg).and_then(|c| {
                channels = c;
                write_channels(&layout, &channels)
            }),
            "capacity" => capacity_for(&cfg, &channels),
            _ => unreachable!("unknown stage {name}"),
        };
        match result {
            Ok(files) => {
                let outputs = files.iter().map(|f| file_record(&layout, f)).collect::<CliResult<Vec<_>>>()?;
                manifest.completed.push(StageRecord { name: name.to_owned(), seed, outputs });
                manifest.write(&layout.manifest())?;
            }
            Err(e) => {
                manifest.failed_stage = Some(name.to_owned());
                manifest.error = Some(e.to_string());
                manifest.write(&layout.manifest())?;
                return Err(CliError::Stage { stage: name, source: Box::new(e) });
            }
        }
    }
    Ok(manifest)
}

/// Paths of every output a manifest lists.
pub fn manifest_outputs(layout: &Layout, manifest: &Manifest) -> Vec<PathBuf> {
    manifest.completed.iter().flat_map(|s| s.outputs.iter().map(|o| layout.root().join(&o.path))).collect()
}
