//! Run configuration: one TOML document, overridable key by key.

use std::fs;
use std::path::Path;

use echogest_core::eval::{CvConfig, DatasetSpec};
use echogest_core::io::WavFormat;
use echogest_core::{DspConfig, GestureKind, HierarchyConfig, PulseTrainConfig};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const SNAPSHOT_FILE: &str = "config.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub gesture: GestureKind,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { gesture: GestureKind::Fwd, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub wav_format: WavFormat,
    /// Also store every dataset profile as a frame stack.
    pub dataset_frames: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub pulse: PulseTrainConfig,
    #[serde(default)]
    pub dsp: DspConfig,
    #[serde(default)]
    pub dataset: DatasetSpec,
    #[serde(default)]
    pub classifier: HierarchyConfig,
    #[serde(default)]
    pub eval: CvConfig,
    #[serde(default)]
    pub synth: SynthConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            pulse: PulseTrainConfig::default(),
            dsp: DspConfig::default(),
            dataset: DatasetSpec::default(),
            classifier: HierarchyConfig::default(),
            eval: CvConfig::default(),
            synth: SynthConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    /// Loads `path` (or the defaults), applies `key.path=value` overrides and
    /// validates the result.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> CliResult<Self> {
        let mut table = match path {
            Some(p) => {
                let text =
                    fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<Table>().map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => Table::new(),
        };
        if !table.contains_key("schema_version") {
            table.insert("schema_version".into(), Value::Integer(SCHEMA_VERSION.into()));
        }
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig =
            Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let wrap = |r: echogest_core::Result<()>| r.map_err(|e| CliError::Config(e.to_string()));
        wrap(self.pulse.validate())?;
        wrap(self.dsp.validate(&self.pulse))?;
        wrap(self.dataset.validate())?;
        wrap(self.classifier.validate())?;
        wrap(self.eval.validate())?;
        let blocks = self.dataset.duration_s / self.pulse.block_len_s();
        if (blocks - blocks.round()).abs() > 1e-6 || blocks.round() < 1.0 {
            return Err(CliError::Config(format!(
                "dataset.duration_s {} is not a whole number of {} s blocks",
                self.dataset.duration_s,
                self.pulse.block_len_s()
            )));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Writes the effective configuration into `dir`.
    pub fn write_snapshot(&self, dir: &Path) -> CliResult<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(SNAPSHOT_FILE), self.to_toml()?)?;
        Ok(())
    }
}

/// Sets `a.b.c = value` in `table`. The value is parsed as a TOML literal
/// and falls back to a plain string.
pub fn apply_override(table: &mut Table, assignment: &str) -> CliResult<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override '{assignment}' is not key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("bad override key '{key}'")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));

    let (last, path) = parts.split_last().expect("non-empty key");
    let mut cur = table;
    for p in path {
        let entry = cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur =
            entry.as_table_mut().ok_or_else(|| CliError::Config(format!("override '{key}': '{p}' is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
