//! Run configuration: command defaults, an optional TOML file and flag
//! overrides, merged in that order.

use std::collections::BTreeMap;
use std::path::Path;

use crate::{CliError, Command};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_SAMPLES: usize = 1_000_000;

/// Values given on the command line; they win over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    /// `key=value` pairs.
    pub params: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub samples: usize,
}

impl RunConfig {
    /// Defaults only.
    pub fn defaults(command: Command) -> Self {
        RunConfig {
            command,
            params: command.defaults().iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
        }
    }

    pub fn resolve(command: Command, file: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut cfg = Self::defaults(command);
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            cfg.merge_toml(&text)?;
        }
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        if let Some(samples) = overrides.samples {
            cfg.samples = samples;
        }
        for kv in &overrides.params {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--param expects key=value, got {kv:?}")))?;
            cfg.set(k.trim(), v.trim().to_string())?;
        }
        if cfg.samples == 0 {
            return Err(CliError::Config("samples must be positive".into()));
        }
        Ok(cfg)
    }

    /// Merges a flat TOML table; arrays of numbers become comma lists.
    pub fn merge_toml(&mut self, text: &str) -> Result<(), CliError> {
        let table: toml::Table = text.parse().map_err(|e| CliError::Config(format!("bad config file: {e}")))?;
        for (key, value) in table {
            let text = toml_scalar(&key, &value)?;
            match key.as_str() {
                "seed" => self.seed = parse_as(&key, &text)?,
                "samples" => self.samples = parse_as(&key, &text)?,
                _ => self.set(&key, text)?,
            }
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: String) -> Result<(), CliError> {
        match self.params.get_mut(key) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => {
                let known: Vec<&str> = self.params.keys().map(String::as_str).collect();
                Err(CliError::Config(format!(
                    "unknown parameter {key:?} for {}; known: {}",
                    self.command.name(),
                    known.join(", ")
                )))
            }
        }
    }

    fn raw(&self, key: &str) -> &str {
        self.params.get(key).map(String::as_str).unwrap_or_else(|| panic!("no default for {key}"))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v: f64 = parse_as(key, self.raw(key))?;
        if !v.is_finite() {
            return Err(CliError::Config(format!("{key} must be finite")));
        }
        Ok(v)
    }

    pub fn positive(&self, key: &str) -> Result<f64, CliError> {
        let v = self.f64(key)?;
        if v <= 0.0 {
            return Err(CliError::Config(format!("{key} must be positive, got {v}")));
        }
        Ok(v)
    }

    pub fn non_negative(&self, key: &str) -> Result<f64, CliError> {
        let v = self.f64(key)?;
        if v < 0.0 {
            return Err(CliError::Config(format!("{key} must be non-negative, got {v}")));
        }
        Ok(v)
    }

    pub fn count(&self, key: &str) -> Result<usize, CliError> {
        let v: usize = parse_as(key, self.raw(key))?;
        if v == 0 {
            return Err(CliError::Config(format!("{key} must be at least 1")));
        }
        Ok(v)
    }

    /// Grid size, at least 2.
    pub fn points(&self, key: &str) -> Result<usize, CliError> {
        let v = self.count(key)?;
        if v < 2 {
            return Err(CliError::Config(format!("{key} must be at least 2")));
        }
        Ok(v)
    }

    /// Comma-separated list of positive numbers.
    pub fn positive_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let list = self
            .raw(key)
            .split(',')
            .map(|s| parse_as::<f64>(key, s.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        if list.is_empty() || list.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(CliError::Config(format!("{key} must be a non-empty list of positive numbers")));
        }
        Ok(list)
    }

    /// (lo, hi) with lo < hi.
    pub fn range(&self, lo: &str, hi: &str, positive_lo: bool) -> Result<(f64, f64), CliError> {
        let a = if positive_lo { self.positive(lo)? } else { self.non_negative(lo)? };
        let b = self.positive(hi)?;
        if !(a < b) {
            return Err(CliError::Config(format!("{lo} must be below {hi}")));
        }
        Ok((a, b))
    }
}

fn parse_as<T: std::str::FromStr>(key: &str, text: &str) -> Result<T, CliError> {
    text.parse().map_err(|_| CliError::Config(format!("cannot parse {key} = {text:?}")))
}

fn toml_scalar(key: &str, value: &toml::Value) -> Result<String, CliError> {
    use toml::Value;
    match value {
        Value::Integer(i) => Ok(i.to_string()),
        Value::Float(f) => Ok(f.to_string()),
        Value::String(s) => Ok(s.clone()),
        Value::Array(items) => {
            let parts = items.iter().map(|v| toml_scalar(key, v)).collect::<Result<Vec<_>, _>>()?;
            Ok(parts.join(","))
        }
        _ => Err(CliError::Config(format!("{key}: expected a number, string or array"))),
    }
}
