//! `key = value` run configuration.
//!
//! Values come from three layers, later ones winning: built-in defaults, an
//! optional config file, and command-line flags. The resolved map is what
//! gets written into every output file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExperimentConfig {
    values: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!("expected `key = value`, found `{line}`"),
                });
            };
            let key = normalize_key(key.trim());
            if key.is_empty() {
                return Err(Error::Parse { path: path.to_path_buf(), line: i + 1, message: "empty key".into() });
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.values.insert(normalize_key(key), value.to_string());
    }

    /// Sets `key` only if it has no value yet.
    pub fn set_default(&mut self, key: &str, value: impl Display) {
        self.values.entry(normalize_key(key)).or_insert_with(|| value.to_string());
    }

    /// Overlays `other` on top of `self`.
    pub fn merge(&mut self, other: &ExperimentConfig) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        let raw = self.raw(key).ok_or_else(|| Error::Config(format!("missing required key `{key}`")))?;
        parse_value(key, raw)
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Vec<T>>
    where
        T::Err: Display,
    {
        let raw = self.raw(key).ok_or_else(|| Error::Config(format!("missing required key `{key}`")))?;
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_value(key, s))
            .collect()
    }

    /// Fails on any key outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        let unknown: Vec<&str> =
            self.values.keys().map(String::as_str).filter(|k| !allowed.contains(k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!("unknown config key(s): {}", unknown.join(", "))))
        }
    }

    /// `# key = value` lines, for embedding in data files.
    pub fn header_lines(&self) -> String {
        self.values.iter().map(|(k, v)| format!("# {k} = {v}\n")).collect()
    }
}

fn normalize_key(key: &str) -> String {
    key.replace('-', "_")
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: Display,
{
    // `inf` is accepted for real-valued keys, which covers unbounded targets
    // and the decoupled limit.
    raw.parse::<T>().map_err(|e| Error::Config(format!("bad value `{raw}` for `{key}`: {e}")))
}
