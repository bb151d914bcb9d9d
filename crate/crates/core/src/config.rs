//! Loading a [`SensorConfig`] from a flat TOML file plus `key=value`
//! overrides.

use std::path::Path;

use serde::Deserialize;
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::params::SensorConfig;

/// Keys accepted in config files and overrides.
pub const FIELDS: [&str; 10] = [
    "m",
    "omega",
    "delta_ratio",
    "r",
    "pump_ratio",
    "d_frac",
    "gamma0_ratio",
    "theta",
    "force_offset",
    "g_nominal",
];

fn check_entry(key: &str, value: &Value) -> Result<()> {
    if !FIELDS.contains(&key) {
        return Err(Error::config(
            key,
            format!("unknown key; expected one of {}", FIELDS.join(", ")),
        ));
    }
    let mut one = Table::new();
    one.insert(key.to_string(), value.clone());
    SensorConfig::deserialize(Value::Table(one))
        .map(|_| ())
        .map_err(|e| Error::config(key, e.message().to_string()))
}

/// Parse one `key=value` override. The value is read as a TOML literal.
pub fn parse_override(spec: &str) -> Result<(String, Value)> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(spec, "override must have the form key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .ok_or_else(|| Error::config(key, format!("cannot parse value `{raw}`")))?;
    check_entry(key, &value)?;
    Ok((key.to_string(), value))
}

/// Build a validated config from optional TOML text and overrides applied in
/// order. Missing keys take their defaults.
pub fn from_parts(text: Option<&str>, overrides: &[String]) -> Result<SensorConfig> {
    let mut table = match text {
        Some(t) => t
            .parse::<Table>()
            .map_err(|e| Error::config("<file>", e.message().to_string()))?,
        None => Table::new(),
    };
    for (k, v) in &table {
        check_entry(k, v)?;
    }
    for spec in overrides {
        let (k, v) = parse_override(spec)?;
        table.insert(k, v);
    }
    let cfg = SensorConfig::deserialize(Value::Table(table))
        .map_err(|e| Error::config("<config>", e.message().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<SensorConfig> {
    let text = match path {
        Some(p) => Some(
            std::fs::read_to_string(p)
                .map_err(|e| Error::config("--config", format!("{}: {e}", p.display())))?,
        ),
        None => None,
    };
    from_parts(text.as_deref(), overrides)
}
