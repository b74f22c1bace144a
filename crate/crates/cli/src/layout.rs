//! File locations under the output directory.

use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

/// `10` for whole minutes, shortest round-trip text otherwise.
pub fn delay_label(delay: f64) -> String {
    if delay.fract() == 0.0 && delay.abs() < 1e15 {
        format!("{}", delay as i64)
    } else {
        format!("{delay}")
    }
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn synth(&self) -> PathBuf {
        self.root.join("synth")
    }

    pub fn synth_cycles(&self) -> PathBuf {
        self.synth().join("cycles")
    }

    pub fn preprocess(&self) -> PathBuf {
        self.root.join("preprocess")
    }

    pub fn preprocessed_cycles(&self) -> PathBuf {
        self.preprocess().join("cycles")
    }

    pub fn estimate(&self) -> PathBuf {
        self.root.join("estimate")
    }

    pub fn observations(&self) -> PathBuf {
        self.estimate().join("observations.csv")
    }

    pub fn fit(&self) -> PathBuf {
        self.root.join("fit")
    }

    pub fn fitted_model(&self) -> PathBuf {
        self.fit().join("model.json")
    }

    pub fn drift(&self) -> PathBuf {
        self.root.join("drift")
    }

    pub fn channel(&self) -> PathBuf {
        self.root.join("channel")
    }

    pub fn channel_file(&self, delay: f64) -> PathBuf {
        self.channel().join(format!("channel_d{}.csv", delay_label(delay)))
    }

    pub fn capacity(&self) -> PathBuf {
        self.root.join("capacity")
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn effective_config(&self) -> PathBuf {
        self.root.join("config.toml")
    }

    /// `path` relative to the root, with `/` separators.
    pub fn relative(&self, path: &Path) -> String {
        let rel = path.strip_prefix(&self.root).unwrap_or(path);
        rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/")
    }
}
