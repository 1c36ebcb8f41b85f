//! Flat key=value experiment configuration.
//!
//! A config file holds one `key=value` pair per line; `#` starts a comment.
//! Unknown keys are rejected. Command-line flags override file values.
//! Values use the distribution mini-grammar from the core crate
//! (`exp:rate=2`, `pareto:alpha=4`, ...).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Known configuration keys with their meaning.
pub const KNOWN_KEYS: &[(&str, &str)] = &[
    ("scenario", "free-form scenario name"),
    ("seed", "base RNG seed (u64)"),
    ("lambda", "Poisson arrival rate (1/ms)"),
    ("dist", "service-time distribution spec"),
    ("dist_f", "coupled run: first distribution"),
    ("dist_g", "coupled run: second distribution"),
    ("discipline", "fb | fbstar | fifo"),
    ("cycles", "busy-cycle replications"),
    ("paths", "coupled-path replications"),
    ("nmax", "largest exceedance level"),
    ("buffer", "buffer size d"),
    ("risk", "risk level p in (0,1)"),
    ("bound", "rho_pow | q_sequence | exact_mm1"),
    ("horizon", "horizon length t (ms)"),
    ("p_splice", "coupled run: splice level"),
    ("sigma_mult", "FIFO heuristic threshold inflation"),
    ("allow_unstable", "simulate despite rho >= 1 (true/false)"),
    ("threads", "worker threads (speed only)"),
    ("format", "csv | json"),
    ("out", "output path"),
];

/// Parsed experiment configuration: a validated key-value store.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExperimentConfig {
    values: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: impl fmt::Display) -> anyhow::Result<()> {
        if !KNOWN_KEYS.iter().any(|(k, _)| *k == key) {
            anyhow::bail!("unknown config key `{key}`");
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    /// Typed lookup; `None` when the key is absent.
    pub fn get_parsed<T: FromStr>(&self, key: &str) -> anyhow::Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config key `{key}` = `{raw}`: {e}")),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One-line rendering for output headers.
    pub fn summary(&self) -> String {
        self.values
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl FromStr for ExperimentConfig {
    type Err = anyhow::Error;

    fn from_str(text: &str) -> anyhow::Result<Self> {
        let mut config = ExperimentConfig::default();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                anyhow::anyhow!("line {}: expected `key=value`, got `{line}`", lineno + 1)
            })?;
            let (key, value) = (key.trim(), value.trim());
            if config.get(key).is_some() {
                anyhow::bail!("line {}: duplicate key `{key}`", lineno + 1);
            }
            config
                .set(key, value)
                .map_err(|e| anyhow::anyhow!("line {}: {e}", lineno + 1))?;
        }
        Ok(config)
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.values {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}
