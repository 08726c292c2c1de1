//! JSON config files: keys mirror long flag names, flags override them.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

pub type ConfigMap = Map<String, Value>;

pub fn load(path: Option<&Path>) -> Result<ConfigMap> {
    let Some(path) = path else {
        return Ok(ConfigMap::new());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    match serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))? {
        Value::Object(map) => Ok(map),
        _ => bail!("config {} must hold a JSON object", path.display()),
    }
}

pub trait Merge: Sized {
    /// Fills every flag left unset from the config file.
    fn merge(self, file: &ConfigMap) -> Result<Self>;
}

impl<T: Serialize + DeserializeOwned> Merge for T {
    fn merge(self, file: &ConfigMap) -> Result<Self> {
        let Value::Object(flags) = serde_json::to_value(&self)? else {
            unreachable!("argument structs serialize to objects")
        };
        let mut merged = file.clone();
        merged.extend(flags.into_iter().filter(|(_, v)| !v.is_null()));
        serde_json::from_value(Value::Object(merged)).context("config file value has the wrong type")
    }
}

/// A required setting, from either a flag or the config file.
pub fn need<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T> {
    value.as_ref().with_context(|| format!("missing --{flag}"))
}

/// Parses a comma-separated list of numbers.
pub fn list(text: &str, flag: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("--{flag}: bad number {s:?}")))
        .collect()
}
