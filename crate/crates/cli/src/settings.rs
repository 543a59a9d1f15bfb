use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use comix::data::SyntheticConfig;

use crate::fail::{CliError, CliResult, Kind};

/// Run settings recognised in config files and as flags.
pub const RUN_KEYS: &[&str] = &[
    "model", "bank", "cdf", "data", "reference", "input", "out", "M", "K", "bins", "steps",
    "seed", "counterfactual", "metrics", "epochs", "joint-l2", "B", "lr", "batch", "dropout",
    "patience", "validation", "widths", "fraction", "scale",
];

/// Merged `key=value` settings: a config file overlaid by command-line flags.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    synthetic: Vec<(String, String)>,
}

fn synthetic_key(key: &str) -> bool {
    SyntheticConfig::default().set(key, "0").is_ok()
}

impl Settings {
    pub fn from_config_text(text: &str, origin: &Path) -> CliResult<Self> {
        let mut s = Settings::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::new(
                    Kind::Format,
                    format!("{}:{}: expected key=value", origin.display(), n + 1),
                )
            })?;
            let (key, value) = (key.trim(), value.trim());
            if RUN_KEYS.contains(&key) {
                s.values.insert(key.to_string(), value.to_string());
            } else if synthetic_key(key) {
                s.synthetic.push((key.to_string(), value.to_string()));
            } else {
                return Err(CliError::flag(format!(
                    "{}:{}: unknown setting '{key}'",
                    origin.display(),
                    n + 1
                )));
            }
        }
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parse<V: FromStr>(&self, key: &str) -> CliResult<Option<V>> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::flag(format!("invalid value '{v}' for --{key}")))
            })
            .transpose()
    }

    pub fn parse_or<V: FromStr>(&self, key: &str, default: V) -> CliResult<V> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn flag(&self, key: &str) -> CliResult<bool> {
        match self.raw(key) {
            None => Ok(false),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => Err(CliError::flag(format!("invalid value '{v}' for --{key}"))),
        }
    }

    pub fn path(&self, key: &str) -> CliResult<PathBuf> {
        self.raw(key)
            .map(PathBuf::from)
            .ok_or_else(|| CliError::flag(format!("--{key} is required")))
    }

    /// Path that must already exist.
    pub fn existing(&self, key: &str) -> CliResult<PathBuf> {
        let p = self.path(key)?;
        require(&p)?;
        Ok(p)
    }

    pub fn synthetic_config(&self) -> CliResult<SyntheticConfig> {
        let mut cfg = SyntheticConfig::default();
        for (k, v) in &self.synthetic {
            cfg.set(k, v).map_err(|e| CliError::flag(e.to_string()))?;
        }
        if let Some(seed) = self.parse::<u64>("seed")? {
            cfg.seed = seed;
        }
        cfg.validate().map_err(|e| CliError::flag(e.to_string()))?;
        Ok(cfg)
    }
}

pub fn require(path: &Path) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::new(
            Kind::MissingFile,
            format!("{} does not exist", path.display()),
        ))
    }
}
