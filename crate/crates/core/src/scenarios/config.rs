//! Loading a [`ScenarioSpec`] from TOML text plus `key=value` overrides.
//!
//! The defaults are serialized to a table first, the file is merged over
//! them, then every override is applied to a key that must already exist.
//! Unknown keys in the file are rejected when the merged table is
//! deserialized.

use toml::{Table, Value};

use super::ScenarioSpec;
use crate::{Error, Result};

/// Builds a spec from `base`, the optional file contents and overrides.
pub fn load_spec(base: &ScenarioSpec, file: Option<&str>, overrides: &[String]) -> Result<ScenarioSpec> {
    let mut table = Table::try_from(base).map_err(|e| Error::Config(format!("cannot serialize defaults: {e}")))?;
    if let Some(text) = file {
        let user: Table = text.parse().map_err(|e| Error::Config(format!("{e}")))?;
        merge(&mut table, user);
    }
    for ov in overrides {
        apply_override(&mut table, ov)?;
    }
    let mut spec: ScenarioSpec = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    fix_noise_sign(&mut spec);
    spec.validate()?;
    Ok(spec)
}

fn merge(into: &mut Table, from: Table) {
    for (k, v) in from {
        match (into.get_mut(&k), v) {
            (Some(Value::Table(dst)), Value::Table(src)) => merge(dst, src),
            (_, v) => {
                into.insert(k, v);
            }
        }
    }
}

/// Applies one `dotted.key=value` override. The value is read as a TOML
/// value when it parses as one, otherwise as a bare string.
pub fn apply_override(table: &mut Table, ov: &str) -> Result<()> {
    let (key, raw) = ov
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{ov}` is not of the form key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    let (last, parents) = path.split_last().expect("split yields at least one item");
    let mut cur = table;
    for (depth, part) in parents.iter().enumerate() {
        cur = match cur.get_mut(*part) {
            Some(Value::Table(t)) => t,
            _ => {
                return Err(Error::Config(format!(
                    "unknown config section `{}`",
                    path[..=depth].join(".")
                )))
            }
        };
    }
    if !cur.contains_key(*last) {
        return Err(Error::Config(format!("unknown config key `{}`", key.trim())));
    }
    cur.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Noise written as a positive dBm figure is taken to mean its negative.
fn fix_noise_sign(spec: &mut ScenarioSpec) {
    let flip = |v: &mut f64| {
        if *v > 0.0 {
            log::warn!("noise power {v} dBm is positive; using -{v} dBm");
            *v = -*v;
        }
    };
    flip(&mut spec.link.noise_dbm);
    spec.sweep.noise_dbm.iter_mut().for_each(flip);
}
