//! Flat `key = value` parameter files.
//!
//! One assignment per line. `#` starts a comment, blank lines are skipped,
//! keys are lower-case words joined by `_` (a `-` is read as `_`), values run
//! to the end of the line with surrounding whitespace trimmed. A key may
//! appear once.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    values: BTreeMap<String, String>,
}

pub fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Params {
    pub fn parse(text: &str) -> Result<Params, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::usage(format!("config line {}: expected `key = value`", lineno + 1)));
            };
            let key = normalize_key(k);
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') {
                return Err(CliError::usage(format!("config line {}: bad key `{}`", lineno + 1, k.trim())));
            }
            let value = v.trim();
            if value.is_empty() {
                return Err(CliError::usage(format!("config line {}: `{key}` has no value", lineno + 1)));
            }
            if values.insert(key.clone(), value.to_string()).is_some() {
                return Err(CliError::usage(format!("config line {}: `{key}` given twice", lineno + 1)));
            }
        }
        Ok(Params { values })
    }

    pub fn load(path: &Path) -> Result<Params, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
        Params::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(normalize_key(key), value.into());
    }

    pub fn remove(&mut self, key: &str) {
        self.values.remove(key);
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::usage(format!("unknown parameter `{k}`"))),
            None => Ok(()),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.raw(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| CliError::usage(format!("`{key}`: cannot read `{v}` as a number")))
            })
            .transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| CliError::usage(format!("`{key}`: cannot read `{v}` as a count"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(v) => Err(CliError::usage(format!("`{key}`: expected true or false, got `{v}`"))),
        }
    }
}
