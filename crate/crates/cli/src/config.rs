//! Flat `key=value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys use snake_case
//! versions of the command-line flags (`per_class`, `min_separation_ms`,
//! ...). Command-line flags take precedence over file values.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::validation("ConfigError", format!("line {}: expected key=value", i + 1)))?;
            let k = k.trim().replace('-', "_");
            if k.is_empty() {
                return Err(CliError::validation("ConfigError", format!("line {}: empty key", i + 1)));
            }
            values.insert(k, v.trim().to_string());
        }
        Ok(RunConfig { values })
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::validation("ConfigError", format!("{}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value, else config value, else `None`.
    pub fn get<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::validation("ConfigError", format!("{key}={v}: {e}")))
            })
            .transpose()
    }

    pub fn get_or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }

    pub fn require<T>(&self, flag: Option<T>, key: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.get(flag, key)?
            .ok_or_else(|| CliError::validation("MissingArgument", format!("--{} (or `{key}=` in config)", key.replace('_', "-"))))
    }

    /// Comma-separated list.
    pub fn list<T>(&self, flag: Option<String>, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let Some(raw) = flag.or_else(|| self.raw(key).map(str::to_string)) else {
            return Ok(None);
        };
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<T>().map_err(|e| CliError::validation("ConfigError", format!("{key}: {e}"))))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let c = RunConfig::parse("# desk\nseed = 7\nbudgets=10,20\n\nout-dir=out\n").unwrap();
        assert_eq!(c.get_or::<u64>(None, "seed", 0).unwrap(), 7);
        assert_eq!(c.get_or(Some(9u64), "seed", 0).unwrap(), 9);
        assert_eq!(c.list::<usize>(None, "budgets").unwrap(), Some(vec![10, 20]));
        assert_eq!(c.raw("out_dir"), Some("out"));
        assert!(c.require::<String>(None, "features").is_err());
    }

    #[test]
    fn bad_lines() {
        assert!(RunConfig::parse("seed 7").is_err());
        let c = RunConfig::parse("seed=x").unwrap();
        assert!(c.get::<u64>(None, "seed").is_err());
    }
}
