//! Configuration files: a JSON overlay on a preset, with unknown keys rejected.

use std::path::Path;

use serde_json::Value;

use super::CliError;
use crate::experiment::{ExperimentConfig, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Paper,
    Desk,
}

impl Preset {
    pub fn config(self) -> ExperimentConfig {
        match self {
            Preset::Paper => ExperimentConfig::paper(),
            Preset::Desk => ExperimentConfig::desk(),
        }
    }
}

/// Command-line values that take precedence over the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    /// `path.to.key=<json>` assignments.
    pub set: Vec<String>,
}

/// Recursively overlays `patch` onto `base`; objects merge key by key, every
/// other value replaces.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn assign(root: &mut Value, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("--set {spec}: expected key=value")))?;
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
    let mut patch = value;
    for key in path.split('.').rev() {
        let mut obj = serde_json::Map::new();
        obj.insert(key.to_owned(), patch);
        patch = Value::Object(obj);
    }
    merge(root, patch);
    Ok(())
}

/// Resolves preset, optional file and overrides into a validated configuration.
pub fn resolve(preset: Preset, path: Option<&Path>, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let mut root = serde_json::to_value(preset.config()).map_err(|e| CliError::Validation(e.to_string()))?;
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let patch: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        if !patch.is_object() {
            return Err(CliError::Validation(format!(
                "{}: expected a JSON object at the top level",
                path.display()
            )));
        }
        merge(&mut root, patch);
    }
    for spec in &overrides.set {
        assign(&mut root, spec)?;
    }
    let mut cfg: ExperimentConfig = serde_json::from_value(root).map_err(|e| {
        let origin = path.map(|p| p.display().to_string()).unwrap_or_else(|| "config".to_owned());
        CliError::Validation(format!("{origin}: {e}"))
    })?;
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = overrides.mode {
        cfg.mode = mode;
    }
    cfg.validate().map_err(|e| CliError::Validation(format!("invalid configuration: {e}")))?;
    Ok(cfg)
}
