//! Flat `key = value` config files; command-line flags take precedence.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};

/// Bad flags, config entries or parameter values (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

#[derive(Debug, Default, Clone)]
pub struct Settings {
    file: HashMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    /// Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut file = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return usage(format!("config line {}: expected key = value", i + 1));
            };
            file.insert(normalize(k), v.trim().to_string());
        }
        Ok(Self { file })
    }

    fn from_file<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.file.get(key) {
            None => Ok(None),
            Some(s) => match s.parse() {
                Ok(v) => Ok(Some(v)),
                Err(_) => usage(format!("config `{key}`: cannot parse `{s}`")),
            },
        }
    }

    pub fn opt<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.from_file(key),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        Ok(self.opt(key, flag)?.unwrap_or(default))
    }

    pub fn required<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<T> {
        match self.opt(key, flag)? {
            Some(v) => Ok(v),
            None => usage(format!("missing --{key}")),
        }
    }

    pub fn positive(&self, key: &str, flag: Option<f64>, default: f64) -> Result<f64> {
        let v = self.get(key, flag, default)?;
        if !(v > 0.0 && v.is_finite()) {
            return usage(format!("--{key} must be positive, got {v}"));
        }
        Ok(v)
    }

    pub fn flag(&self, key: &str, set: bool) -> Result<bool> {
        Ok(set || self.from_file(key)?.unwrap_or(false))
    }

    /// Comma-separated, strictly increasing list.
    pub fn ladder(&self, key: &str, flag: Option<String>) -> Result<Option<Vec<f64>>> {
        let Some(s) = self.opt::<String>(key, flag)? else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for part in s.split(',') {
            match part.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(v),
                _ => return usage(format!("--{key}: cannot parse `{part}`")),
            }
        }
        if out.windows(2).any(|w| !(w[1] > w[0])) {
            return usage(format!("--{key} must be strictly increasing"));
        }
        Ok(Some(out))
    }
}
