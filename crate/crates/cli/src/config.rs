//! Flat `key = value` configuration with `[section]` headers.
//!
//! Keys inside a section are addressed as `section.key`. Lines starting with
//! `#` or `;` are comments. Repeating a key is an error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, CliResult};

/// Every key the tool understands.
pub const KNOWN_KEYS: &[&str] = &[
    "mode",
    "system.n",
    "system.unitary",
    "system.hamiltonian",
    "system.controls",
    "system.control_values",
    "system.period",
    "system.state",
    "system.p0",
    "system.x0",
    "system.w",
    "measurement.measured",
    "measurement.frame",
    "measurement.eigenvalues",
    "run.seed",
    "run.runs",
    "run.steps",
    "run.threshold",
    "run.restarts",
    "run.iterations",
    "path.outcomes",
    "hitting.target",
    "hitting.overlap",
    "hitting.delta",
    "lie.generators",
    "lie.drift",
    "lie.period_assumed",
    "output.dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
    /// Directory that relative input paths are resolved against.
    base: PathBuf,
}

impl Config {
    pub fn parse(text: &str, base: &Path) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let at = |msg: String| CliError::Malformed(format!("line {}: {msg}", lineno + 1));
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| at(format!("unterminated section header `{line}`")))?
                    .trim();
                if name.is_empty() || name.contains(['.', '[', ']', '=']) {
                    return Err(at(format!("bad section name `{name}`")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected `key = value`, found `{line}`")))?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(at(format!("bad key `{key}`")));
            }
            let full = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            if values.insert(full.clone(), value.trim().to_string()).is_some() {
                return Err(at(format!("duplicate key `{full}`")));
            }
        }
        let config = Self {
            values,
            base: base.to_path_buf(),
        };
        config.check_known()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    fn check_known(&self) -> CliResult<()> {
        if let Some(k) = self.values.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(CliError::Malformed(format!("unknown key `{k}`")));
        }
        Ok(())
    }

    /// Apply a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> CliResult<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Malformed(format!("--set expects key=value, got `{assignment}`")))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Malformed(format!("unknown key `{key}`")));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn require(&self, key: &str) -> CliResult<&str> {
        self.get(key)
            .ok_or_else(|| CliError::Malformed(format!("missing required key `{key}`")))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| CliError::Malformed(format!("cannot parse `{key} = {v}`")))
            })
            .transpose()
    }

    pub fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn require_parsed<T: FromStr>(&self, key: &str) -> CliResult<T> {
        self.parsed(key)?
            .ok_or_else(|| CliError::Malformed(format!("missing required key `{key}`")))
    }

    /// Comma-separated list; empty entries are rejected.
    pub fn list(&self, key: &str) -> CliResult<Option<Vec<String>>> {
        self.get(key)
            .map(|v| {
                let items: Vec<String> = v.split(',').map(|s| s.trim().to_string()).collect();
                if items.iter().any(String::is_empty) {
                    Err(CliError::Malformed(format!("empty entry in `{key}`")))
                } else {
                    Ok(items)
                }
            })
            .transpose()
    }

    pub fn parsed_list<T: FromStr>(&self, key: &str) -> CliResult<Option<Vec<T>>> {
        self.list(key)?
            .map(|items| {
                items
                    .iter()
                    .map(|s| {
                        s.parse::<T>()
                            .map_err(|_| CliError::Malformed(format!("cannot parse `{s}` in `{key}`")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn resolve(&self, path: &str) -> PathBuf {
        self.base.join(path)
    }
}
