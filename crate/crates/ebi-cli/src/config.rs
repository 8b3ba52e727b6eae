//! Flat `key=value` config files and flag/file merging.
//!
//! Every subcommand accepts `--config FILE`; the file supplies defaults and
//! explicit flags override them. Keys use the flag spelling (kebab-case),
//! `#` starts a comment, and keys a command does not know are rejected so
//! that typos fail loudly instead of silently falling back to defaults.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

/// A command-line error carrying the intended process exit code:
/// 2 for invalid configuration, 3 for runtime/data failures.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m,
        }
    }
}

/// Maps a library error to a configuration error (exit 2). Use while
/// validating parameters, before any real work starts.
pub fn config_err(e: impl Display) -> CliError {
    CliError::Config(e.to_string())
}

/// Maps a library error to a runtime/data error (exit 3). Use once the
/// configuration is accepted and the command is executing.
pub fn runtime_err(e: impl Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Parsed contents of a `key=value` config file (empty when no file given).
#[derive(Debug, Default)]
pub struct ConfigMap {
    entries: Vec<(String, String)>,
}

impl ConfigMap {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(ConfigMap::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut entries: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "{}:{}: expected key=value, got `{line}`",
                    path.display(),
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if entries.iter().any(|(k, _)| *k == key) {
                return Err(CliError::Config(format!(
                    "{}:{}: duplicate key `{key}`",
                    path.display(),
                    lineno + 1
                )));
            }
            entries.push((key, value));
        }
        Ok(ConfigMap { entries })
    }

    /// Rejects any key outside the command's vocabulary.
    pub fn check_known(&self, known: &[&str]) -> Result<(), CliError> {
        for (key, _) in &self.entries {
            if !known.contains(&key.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown config key `{key}` (expected one of: {})",
                    known.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// The file's value for `key`, parsed; `None` when absent.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(text) => text.parse().map(Some).map_err(|e| {
                CliError::Config(format!("config key `{key}`: cannot parse `{text}`: {e}"))
            }),
        }
    }
}

/// Flag value if present, else the config-file value.
pub fn resolve<T: FromStr>(
    flag: Option<T>,
    cfg: &ConfigMap,
    key: &str,
) -> Result<Option<T>, CliError>
where
    T::Err: Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => cfg.get(key),
    }
}

/// Unwraps a parameter that must be present after merging.
pub fn required<T>(value: Option<T>, key: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("missing required parameter `{key}`")))
}

/// Parses a comma-separated list (`"1,2,4"`); surrounding whitespace per
/// item is ignored, empty items are rejected.
pub fn parse_list<T: FromStr>(text: &str, key: &str) -> Result<Vec<T>, CliError>
where
    T::Err: Display,
{
    let mut out = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(CliError::Config(format!("`{key}` has an empty list item in `{text}`")));
        }
        out.push(item.parse().map_err(|e| {
            CliError::Config(format!("`{key}`: cannot parse list item `{item}`: {e}"))
        })?);
    }
    if out.is_empty() {
        return Err(CliError::Config(format!("`{key}` must be a nonempty list")));
    }
    Ok(out)
}
