//! `key = value` parameter files. Keys are flag names without the leading
//! dashes; blank lines and `#` comments are ignored.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key = value, got {raw:?}", lineno + 1);
            };
            let key = key.trim().trim_start_matches("--").to_string();
            if values
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                bail!("line {}: duplicate key {key:?}", lineno + 1);
            }
        }
        Ok(Self { values })
    }

    /// Fails on any key outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                bail!(
                    "unknown config key {key:?}; expected one of {}",
                    allowed.join(", ")
                );
            }
        }
        Ok(())
    }

    /// The flag value when given, otherwise the file's entry.
    pub fn f64_or(&self, key: &str, flag: Option<f64>) -> Result<Option<f64>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|v| {
                v.parse::<f64>()
                    .with_context(|| format!("{key}: not a number: {v:?}"))
            })
            .transpose()
    }

    pub fn u64_or(&self, key: &str, flag: Option<u64>) -> Result<Option<u64>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|v| {
                v.parse::<u64>()
                    .with_context(|| format!("{key}: not an integer: {v:?}"))
            })
            .transpose()
    }

    pub fn str_or(&self, key: &str, flag: Option<String>) -> Option<String> {
        flag.or_else(|| self.values.get(key).cloned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_dashes() {
        let c = ConfigFile::parse("# market\nlambda = 2.2\n--mu=2.8  # service\n\n").unwrap();
        assert_eq!(c.f64_or("lambda", None).unwrap(), Some(2.2));
        assert_eq!(c.f64_or("mu", None).unwrap(), Some(2.8));
        assert_eq!(c.f64_or("mu", Some(3.0)).unwrap(), Some(3.0));
        assert_eq!(c.f64_or("reward", None).unwrap(), None);
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(ConfigFile::parse("lambda 2.2").is_err());
        assert!(ConfigFile::parse("mu=1\nmu=2").is_err());
        let c = ConfigFile::parse("lamda=1").unwrap();
        assert!(c.check_keys(&["lambda"]).is_err());
        let c = ConfigFile::parse("lambda=abc").unwrap();
        assert!(c.f64_or("lambda", None).is_err());
    }
}
