//! Loading run configurations from JSON files, presets and manifests.

use std::fmt;
use std::path::{Path, PathBuf};

use hyperflock_core::dynamics::SimConfig;
use hyperflock_core::Error as CoreError;
use serde_json::{Map, Value};

/// Seed used by the presets unless the config file sets one.
pub const PRESET_SEED: u64 = 1;

/// Named starting configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Fig1,
    GeodesicHk,
}

impl Preset {
    pub fn config(self) -> SimConfig {
        match self {
            Preset::Fig1 => SimConfig::fig1(PRESET_SEED),
            Preset::GeodesicHk => SimConfig::geodesic_hk(PRESET_SEED),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::GeodesicHk => "geodesic-hk",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{origin}: malformed JSON: {source}")]
    Syntax { origin: String, source: serde_json::Error },
    #[error("{origin}: key `{key}`: {message}")]
    Key { origin: String, key: String, message: String },
    #[error("no configuration given: pass --config, --preset or both")]
    Missing,
}

impl ConfigError {
    /// The offending key, when the error names one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Key { key, .. } => Some(key),
            _ => None,
        }
    }
}

/// Reads a JSON file into a value.
pub fn read_json(path: &Path) -> Result<Value, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
    serde_json::from_str(&text).map_err(|source| ConfigError::Syntax { origin: path.display().to_string(), source })
}

/// The config object inside a run manifest, or the value itself.
pub fn unwrap_manifest(value: Value) -> Value {
    match value {
        Value::Object(mut map) if map.contains_key("config") && map.contains_key("status") => {
            map.remove("config").unwrap_or(Value::Null)
        }
        other => other,
    }
}

/// Top-level keys of `overlay` replace those of `base`; `diagnostics` is
/// merged one level deeper.
pub fn merge(base: &mut Map<String, Value>, overlay: Map<String, Value>) {
    for (key, value) in overlay {
        match (key.as_str(), base.get_mut(&key), value) {
            ("diagnostics", Some(Value::Object(old)), Value::Object(new)) => old.extend(new),
            (_, _, value) => {
                base.insert(key, value);
            }
        }
    }
}

/// Deserializes and validates a config, naming the offending key on failure.
pub fn from_value(value: Value, origin: &str) -> Result<SimConfig, ConfigError> {
    let cfg: SimConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let key = e.path().to_string();
        ConfigError::Key { origin: origin.to_owned(), key, message: e.into_inner().to_string() }
    })?;
    validate(cfg, origin)
}

fn validate(cfg: SimConfig, origin: &str) -> Result<SimConfig, ConfigError> {
    match cfg.validate() {
        Ok(()) => Ok(cfg),
        Err(CoreError::InvalidConfig { key, reason }) => {
            Err(ConfigError::Key { origin: origin.to_owned(), key: key.to_owned(), message: reason })
        }
        Err(other) => {
            Err(ConfigError::Key { origin: origin.to_owned(), key: "weight".into(), message: other.to_string() })
        }
    }
}

pub fn preset_value(preset: Preset) -> Map<String, Value> {
    match serde_json::to_value(preset.config()) {
        Ok(Value::Object(map)) => map,
        _ => unreachable!("SimConfig serializes to an object"),
    }
}

/// Builds the run configuration from an optional preset overlaid with an
/// optional file, which may also be a manifest from an earlier run.
pub fn load(path: Option<&Path>, preset: Option<Preset>) -> Result<SimConfig, ConfigError> {
    let mut base = match preset {
        Some(p) => preset_value(p),
        None if path.is_none() => return Err(ConfigError::Missing),
        None => Map::new(),
    };
    let origin = match path {
        Some(path) => {
            let origin = path.display().to_string();
            match unwrap_manifest(read_json(path)?) {
                Value::Object(map) => merge(&mut base, map),
                _ => {
                    return Err(ConfigError::Key { origin, key: ".".into(), message: "expected a JSON object".into() });
                }
            }
            origin
        }
        None => format!("preset {}", preset.map(Preset::name).unwrap_or_default()),
    };
    from_value(Value::Object(base), &origin)
}
