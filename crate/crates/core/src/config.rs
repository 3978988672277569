//! `key = value` configuration files.
//!
//! One entry per line, `#` starts a comment, later entries override earlier
//! ones. Values are kept as strings and parsed on access so that errors can
//! name the offending key.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("key `{key}`: cannot parse `{value}`: {message}")]
    Invalid {
        key: String,
        value: String,
        message: String,
    },
    #[error("key `{0}` is required")]
    Missing(String),
    #[error("unknown key `{0}`")]
    Unknown(String),
}

impl ConfigError {
    /// Name of the key the error refers to, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { key, .. }
            | ConfigError::Missing(key)
            | ConfigError::Unknown(key) => Some(key),
            ConfigError::Syntax { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            cfg.set_assignment(line)
                .map_err(|message| ConfigError::Syntax {
                    line: i + 1,
                    message,
                })?;
        }
        Ok(cfg)
    }

    /// Applies one `key=value` assignment, as given on a command line.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<(), String> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| format!("expected `key = value`, got `{assignment}`"))?;
        let k = k.trim();
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(format!("bad key `{k}`"));
        }
        self.set(k, v.trim());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>().map_err(|e| ConfigError::Invalid {
                    key: key.to_string(),
                    value: v.to_string(),
                    message: e.to_string(),
                })
            })
            .transpose()
    }

    pub fn get_or<T>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T>(&self, key: &str) -> Result<T, ConfigError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    /// Comma-separated list value.
    pub fn get_list<T>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| {
                s.trim().parse::<T>().map_err(|e| ConfigError::Invalid {
                    key: key.to_string(),
                    value: v.to_string(),
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    /// Fails on the first key not in `known`.
    pub fn check_known(&self, known: &[&str]) -> Result<(), ConfigError> {
        match self.keys().find(|k| !known.contains(k)) {
            Some(k) => Err(ConfigError::Unknown(k.to_string())),
            None => Ok(()),
        }
    }
}

/// Canonical form: sorted `key = value` lines. Parsing it back yields an equal
/// config, so it is suitable for hashing.
impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let cfg = Config::parse("# run\nseed = 3\nbatch_size=128 # per step\nseed = 4\n").unwrap();
        assert_eq!(cfg.get::<u64>("seed").unwrap(), Some(4));
        assert_eq!(cfg.get_or("batch_size", 1usize).unwrap(), 128);
        assert_eq!(cfg.get_or("missing", 7u32).unwrap(), 7);
        assert_eq!(Config::parse(&cfg.to_string()).unwrap(), cfg);
    }

    #[test]
    fn errors_name_the_key() {
        let cfg = Config::parse("seed = abc\n").unwrap();
        let err = cfg.get::<u64>("seed").unwrap_err();
        assert_eq!(err.key(), Some("seed"));
        assert!(err.to_string().contains("seed"));
        assert_eq!(
            cfg.check_known(&["other"]).unwrap_err(),
            ConfigError::Unknown("seed".into())
        );
        assert_eq!(
            cfg.require::<u64>("n").unwrap_err(),
            ConfigError::Missing("n".into())
        );
        assert!(matches!(
            Config::parse("\n\nnot an assignment\n"),
            Err(ConfigError::Syntax { line: 3, .. })
        ));
    }

    #[test]
    fn lists() {
        let cfg = Config::parse("mix = 0.8, 0.1,0.1\n").unwrap();
        assert_eq!(
            cfg.get_list::<f64>("mix").unwrap(),
            Some(vec![0.8, 0.1, 0.1])
        );
    }
}
