//! Flat `key=value` configuration text.
//!
//! One entry per line, `#` starts a comment, blank lines are ignored, keys
//! and values are trimmed. Later assignments of a key replace earlier ones.
//! Serialization writes keys in sorted order so resolved configs are
//! byte-stable.

use crate::dynamics::Overrides;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            cfg.apply_assignment(line)
                .map_err(|reason| Error::Config { line: i + 1, reason })?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text)
    }

    /// Applies a single `key=value` assignment, as given on a command line.
    pub fn apply_assignment(&mut self, line: &str) -> std::result::Result<(), String> {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got `{line}`"))?;
        let k = k.trim();
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(format!("invalid key `{k}`"));
        }
        self.entries.insert(k.to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl fmt::Display) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn set_default(&mut self, key: &str, value: impl fmt::Display) {
        self.entries.entry(key.to_string()).or_insert_with(|| value.to_string());
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn value<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| Error::InvalidParameter {
                key: key.to_string(),
                reason: format!("cannot parse `{v}`"),
            }),
        }
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.value(key)?.unwrap_or(default))
    }

    /// Entries from `other` replace entries here.
    pub fn merge(&mut self, other: &Config) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Numeric parameters under `<system>.` with the prefix stripped, e.g.
    /// `pendulum.mass=0.5` becomes `mass -> 0.5`.
    pub fn system_overrides<F: Scalar>(&self, system: &str) -> Result<Overrides<F>> {
        let prefix = format!("{system}.");
        let mut out = Overrides::new();
        for (k, v) in &self.entries {
            if let Some(param) = k.strip_prefix(&prefix) {
                let x: f64 = v.parse().map_err(|_| Error::InvalidParameter {
                    key: k.clone(),
                    reason: format!("not a number: `{v}`"),
                })?;
                out.insert(param.to_string(), F::lit(x));
            }
        }
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_string()).map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

impl FromStr for Config {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Config::parse(s)
    }
}
