//! Flat `key=value` configuration with defaults, file input and overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use sha2::{Digest, Sha256};

/// A configuration problem attributable to the user's input.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{source_name}:{line}: {message}")]
    Syntax {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("key '{key}': {message}")]
    BadValue { key: String, message: String },
    #[error("cannot read config file {path}: {message}")]
    Io { path: String, message: String },
}

/// One recognized key with its default value (empty means unset).
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub key: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

pub const fn key(key: &'static str, default: &'static str, help: &'static str) -> KeySpec {
    KeySpec { key, default, help }
}

/// Resolved configuration: every schema key has a value.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

fn normalize(k: &str) -> String {
    k.trim().replace('-', "_")
}

impl Config {
    /// Defaults, then file entries, then overrides; later sources win.
    pub fn resolve(
        schema: &[KeySpec],
        file: Option<(&str, &str)>,
        overrides: &[(String, String)],
    ) -> Result<Self, ConfigError> {
        let mut values: BTreeMap<String, String> = schema
            .iter()
            .map(|s| (s.key.to_string(), s.default.to_string()))
            .collect();
        if let Some((name, text)) = file {
            for (k, v) in parse_file(name, text)? {
                if !values.contains_key(&k) {
                    return Err(ConfigError::UnknownKey(k));
                }
                values.insert(k, v);
            }
        }
        for (k, v) in overrides {
            let k = normalize(k);
            if !values.contains_key(&k) {
                return Err(ConfigError::UnknownKey(k));
            }
            values.insert(k, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(
        schema: &[KeySpec],
        path: Option<&Path>,
        overrides: &[(String, String)],
    ) -> Result<Self, ConfigError> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Io {
                    path: p.display().to_string(),
                    message: e.to_string(),
                })?;
                Self::resolve(schema, Some((&p.display().to_string(), &text)), overrides)
            }
            None => Self::resolve(schema, None, overrides),
        }
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("key '{key}' is not in the schema"))
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    fn bad(key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::BadValue {
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub fn string(&self, key: &str) -> String {
        self.raw(key).to_string()
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.raw(key);
        v.parse::<f64>()
            .map_err(|_| Self::bad(key, format!("expected a number, got '{v}'")))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.raw(key) {
            "" | "auto" => Ok(None),
            _ => self.f64(key).map(Some),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        let v = self.raw(key);
        v.parse::<f64>()
            .ok()
            .filter(|x| *x >= 0.0 && x.fract() == 0.0 && *x <= 1e15)
            .map(|x| x as usize)
            .ok_or_else(|| Self::bad(key, format!("expected a nonnegative integer, got '{v}'")))
    }

    pub fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        let v = self.raw(key);
        v.parse::<u64>()
            .map_err(|_| Self::bad(key, format!("expected an unsigned integer, got '{v}'")))
    }

    pub fn bool(&self, key: &str) -> Result<bool, ConfigError> {
        match self.raw(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            v => Err(Self::bad(key, format!("expected true or false, got '{v}'"))),
        }
    }

    /// Comma-separated numbers; empty means an empty list.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let v = self.raw(key);
        if v.trim().is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Self::bad(key, format!("'{s}' is not a number")))
            })
            .collect()
    }

    /// One of `choices`.
    pub fn choice(&self, key: &str, choices: &[&str]) -> Result<String, ConfigError> {
        let v = self.raw(key);
        if choices.contains(&v) {
            Ok(v.to_string())
        } else {
            Err(Self::bad(
                key,
                format!("expected one of {}, got '{v}'", choices.join("|")),
            ))
        }
    }

    /// Canonical text: sorted `key=value` lines.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.values {
            s.push_str(k);
            s.push('=');
            s.push_str(v);
            s.push('\n');
        }
        s
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_file(name: &str, text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            source_name: name.to_string(),
            line: i + 1,
            message: format!("expected key=value, got '{content}'"),
        })?;
        let k = normalize(k);
        if k.is_empty() {
            return Err(ConfigError::Syntax {
                source_name: name.to_string(),
                line: i + 1,
                message: "empty key".into(),
            });
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

/// Splits `--key value` / `--key=value` tokens into pairs.
pub fn parse_overrides(tokens: &[String]) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    let mut it = tokens.iter().peekable();
    while let Some(tok) = it.next() {
        let Some(body) = tok.strip_prefix("--") else {
            return Err(ConfigError::Syntax {
                source_name: "command line".into(),
                line: 0,
                message: format!("unexpected argument '{tok}'"),
            });
        };
        if let Some((k, v)) = body.split_once('=') {
            out.push((normalize(k), v.to_string()));
            continue;
        }
        match it.next() {
            Some(v) => out.push((normalize(body), v.clone())),
            None => {
                return Err(ConfigError::BadValue {
                    key: normalize(body),
                    message: "missing value".into(),
                })
            }
        }
    }
    Ok(out)
}
