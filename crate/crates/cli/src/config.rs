use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

/// Keys accepted in a configuration file; each mirrors a long flag.
pub const KNOWN_KEYS: &[&str] = &[
    "algo",
    "n-key",
    "perms",
    "order",
    "smoothing",
    "policy",
    "queue",
    "max-actions",
    "stride",
    "seed",
    "grammars",
    "variables",
    "terminals",
    "type",
    "keys",
    "sequences",
    "seen",
    "videos",
    "training",
    "noise",
];

/// `key = value` settings; a flag given on the command line wins over the
/// file, which wins over the built-in default.
#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("line {}: expected key=value", i + 1);
            };
            let k = k.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&k.as_str()) {
                bail!("line {}: unknown key `{k}`", i + 1);
            }
            values.insert(k, v.trim().to_string());
        }
        Ok(Settings { values })
    }

    pub fn get<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.values.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|e| anyhow::anyhow!("config key `{key}`: {e}")),
            None => Ok(default),
        }
    }

    pub fn positive(&self, flag: Option<usize>, key: &str, default: usize) -> Result<usize> {
        let v = self.get(flag, key, default)?;
        if v == 0 {
            bail!("`{key}` must be positive");
        }
        Ok(v)
    }
}
