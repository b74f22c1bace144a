//! Pipeline configuration: a TOML file with sections, overridden by flags.

use std::path::{Path, PathBuf};

use memcap::drift::QuantisationGrid;
use memcap::energy::{EnergyExperiment, DEFAULT_A, DEFAULT_B};
use memcap::signal::{AlignmentConfig, WaveformSchedule};
use memcap::{make_grid, BaOptions, DeviceParams, EnergyCostModel, ReferenceDriftParams, SGrid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config, CliError, CliResult};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "MEMCAP_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Root seed; required by every stochastic command.
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    /// Also write SVG line charts next to the CSV outputs.
    pub plots: bool,
    pub paths: InputPaths,
    pub device: DeviceParams,
    pub schedule: WaveformSchedule,
    pub acquisition: Acquisition,
    pub experiment: EnergyExperiment,
    pub alignment: AlignmentConfig,
    pub energy: EnergySection,
    pub drift: DriftSection,
    pub grids: Grids,
    pub channel: ChannelSection,
    pub capacity: CapacitySection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: None,
            out_dir: PathBuf::from("out"),
            plots: false,
            paths: InputPaths::default(),
            device: DeviceParams::default(),
            schedule: WaveformSchedule::default(),
            acquisition: Acquisition::default(),
            experiment: EnergyExperiment::default(),
            alignment: AlignmentConfig::default(),
            energy: EnergySection::default(),
            drift: DriftSection::default(),
            grids: Grids::default(),
            channel: ChannelSection::default(),
            capacity: CapacitySection::default(),
        }
    }
}

/// Inputs read by individual commands. Unset entries fall back to the
/// outputs of the preceding stage under `out_dir`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputPaths {
    /// Directory of measurement-frame cycle traces, or a single trace file.
    pub traces: Option<PathBuf>,
    /// Directory of preprocessed device-frame cycles.
    pub cycles: Option<PathBuf>,
    /// `r_ohms,e_joules` observation file.
    pub observations: Option<PathBuf>,
    /// Drift sample interchange file.
    pub drift_samples: Option<PathBuf>,
    /// Directory of channel matrix files.
    pub channels: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Acquisition {
    /// Hz.
    pub sample_rate: f64,
}

impl Default for Acquisition {
    fn default() -> Self {
        Self { sample_rate: 1e5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergySource {
    /// Use the model written by `fit-energy`.
    Fit,
    /// Use `a` and `b` from this section.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySection {
    pub model: EnergySource,
    pub a: f64,
    pub b: f64,
}

impl Default for EnergySection {
    fn default() -> Self {
        Self { model: EnergySource::Fit, a: DEFAULT_A, b: DEFAULT_B }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftSource {
    Reference,
    Samples,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftSection {
    pub source: DriftSource,
    pub reference: ReferenceDriftParams,
}

impl Default for DriftSection {
    fn default() -> Self {
        Self { source: DriftSource::Reference, reference: ReferenceDriftParams::default() }
    }
}

/// Uniform quantisation grids, in ohms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub input_lo: f64,
    pub input_hi: f64,
    pub input_q: usize,
    pub output_lo: f64,
    pub output_hi: f64,
    pub output_q: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self { input_lo: 1e5, input_hi: 1e6, input_q: 100, output_lo: 1e5, output_hi: 2e7, output_q: 100 }
    }
}

impl Grids {
    pub fn input(&self) -> CliResult<QuantisationGrid> {
        Ok(make_grid(self.input_lo, self.input_hi, self.input_q)?)
    }

    pub fn output(&self) -> CliResult<QuantisationGrid> {
        Ok(make_grid(self.output_lo, self.output_hi, self.output_q)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    /// Minutes.
    pub delays: Vec<f64>,
    /// Drift draws per input level.
    pub n: usize,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self { delays: vec![10.0, 50.0, 100.0], n: 1000 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacitySection {
    pub s_grid: SGrid,
    pub ba: BaOptions,
    /// Also write the optimal input distribution of every curve point.
    pub write_distributions: bool,
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub plots: bool,
    /// `section.key=value` assignments; values are TOML literals, bare words
    /// are taken as strings.
    pub set: Vec<String>,
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_owned()),
    }
}

fn assign(table: &mut toml::Table, assignment: &str) -> CliResult<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config(format!("--set expects key=value, got '{assignment}'")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(config(format!("bad key '{key}' in --set")));
    }
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| config(format!("'{part}' in '{key}' is not a section")))?;
    }
    node.insert(parts[parts.len() - 1].to_owned(), parse_value(raw.trim()));
    Ok(())
}

/// Rewrites relative `out_dir` and `paths.*` entries against `base`.
fn rebase_paths(table: &mut toml::Table, base: &Path) {
    let rebase = |v: &mut toml::Value| {
        if let toml::Value::String(s) = v {
            if Path::new(s.as_str()).is_relative() {
                *s = base.join(s.as_str()).to_string_lossy().into_owned();
            }
        }
    };
    if let Some(v) = table.get_mut("out_dir") {
        rebase(v);
    }
    if let Some(paths) = table.get_mut("paths").and_then(toml::Value::as_table_mut) {
        paths.iter_mut().for_each(|(_, v)| rebase(v));
    }
}

impl PipelineConfig {
    /// Reads `path` (if any), applies the overrides and validates.
    ///
    /// Relative paths inside the file are taken relative to the file's
    /// directory; paths given as flags relative to the working directory.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> CliResult<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| config(format!("{}: {e}", p.display())))?;
                text.parse::<toml::Table>().map_err(|e| config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        if let Some(base) = path.and_then(Path::parent) {
            rebase_paths(&mut table, base);
        }
        for s in &overrides.set {
            assign(&mut table, s)?;
        }
        let mut cfg: PipelineConfig = table.try_into().map_err(|e: toml::de::Error| config(e.to_string()))?;
        if let Some(seed) = overrides.seed {
            cfg.seed = Some(seed);
        }
        if let Some(dir) = &overrides.out_dir {
            cfg.out_dir = dir.clone();
        }
        cfg.plots |= overrides.plots;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.device.validate()?;
        self.schedule.validate()?;
        self.alignment.validate()?;
        self.experiment.validate()?;
        self.drift.reference.validate()?;
        self.capacity.ba.validate()?;
        self.capacity.s_grid.values()?;
        self.grids.input()?;
        self.grids.output()?;
        let fs = self.acquisition.sample_rate;
        if !(fs.is_finite() && fs > 0.0) {
            return Err(config(format!("acquisition.sample_rate must be finite and > 0, got {fs}")));
        }
        if self.channel.delays.is_empty() {
            return Err(config("channel.delays is empty"));
        }
        if let Some(d) = self.channel.delays.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(config(format!("delays must be finite and >= 0, got {d}")));
        }
        if self.channel.n == 0 {
            return Err(config("channel.n must be > 0"));
        }
        EnergyCostModel::new(self.energy.a, self.energy.b)?;
        if self.drift.source == DriftSource::Samples && self.paths.drift_samples.is_none() {
            return Err(config("drift.source = \"samples\" needs paths.drift_samples"));
        }
        let p = &self.paths;
        for (name, path) in [
            ("traces", &p.traces),
            ("cycles", &p.cycles),
            ("observations", &p.observations),
            ("drift_samples", &p.drift_samples),
            ("channels", &p.channels),
        ] {
            if let Some(path) = path {
                if !path.exists() {
                    return Err(config(format!("paths.{name} = {} does not exist", path.display())));
                }
            }
        }
        Ok(())
    }

    pub fn require_seed(&self) -> CliResult<u64> {
        self.seed.ok_or_else(|| config("this command is stochastic and needs a seed (--seed or `seed` in the config)"))
    }

    pub fn fixed_energy_model(&self) -> EnergyCostModel {
        EnergyCostModel { a: self.energy.a, b: self.energy.b, decomposition: None }
    }

    /// Canonical TOML rendering of the effective configuration.
    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Runtime(format!("cannot serialise config: {e}")))
    }

    /// SHA-256 of the canonical rendering, with `out_dir` blanked so that
    /// identical runs in different directories share a hash.
    pub fn hash(&self) -> CliResult<String> {
        let located = Self { out_dir: PathBuf::new(), ..self.clone() };
        Ok(hex::encode(Sha256::digest(located.to_toml()?.as_bytes())))
    }
}
