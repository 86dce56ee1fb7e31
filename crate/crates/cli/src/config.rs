//! Flat `section.key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. A key may appear only
//! once. Values are kept as strings and parsed on lookup, so error messages
//! can name the offending key.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || key.chars().any(char::is_whitespace) {
                return Err(CliError::config(format!("line {}: bad key `{key}`", lineno + 1)));
            }
            if entries.insert(key.to_owned(), value.to_owned()).is_some() {
                return Err(CliError::config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    /// Apply a `key=value` override, replacing any existing entry.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("override `{assignment}` is not `key=value`")))?;
        self.entries.insert(key.trim().to_owned(), value.trim().to_owned());
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn has_section(&self, section: &str) -> bool {
        let prefix = format!("{section}.");
        self.entries.keys().any(|k| k.starts_with(&prefix))
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.str(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| CliError::config(format!("`{key}`: expected a finite number, got `{v}`")))
            })
            .transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, CliError> {
        self.f64(key)?
            .ok_or_else(|| CliError::config(format!("missing required key `{key}`")))
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.str(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| CliError::config(format!("`{key}`: expected a non-negative integer, got `{v}`")))
            })
            .transpose()
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        self.str(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| CliError::config(format!("`{key}`: expected a non-negative integer, got `{v}`")))
            })
            .transpose()
    }

    /// Comma-separated list of numbers.
    pub fn vec(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.str(key)
            .map(|v| {
                v.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| CliError::config(format!("`{key}`: bad component `{}`", t.trim())))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        self.str(key)
            .map(|v| match v {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                other => Err(CliError::config(format!("`{key}`: expected true or false, got `{other}`"))),
            })
            .transpose()
    }
}
