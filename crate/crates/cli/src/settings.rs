//! Layered configuration: flag > config file > built-in default.

use std::collections::BTreeMap;
use std::path::Path;

use clarity_core::config::KvConfig;

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 42;

/// Sections that take the run seed unless they set their own.
const SEEDED_SECTIONS: [&str; 3] = ["train", "split", "augment"];

#[derive(Debug, Clone, Default)]
pub struct Settings {
    effective: KvConfig,
    sources: BTreeMap<String, &'static str>,
}

impl Settings {
    /// `flags` holds keys set from the command line.
    pub fn load(config: Option<&Path>, flags: KvConfig) -> Result<Self, CliError> {
        let file = match config {
            Some(p) => KvConfig::load(p)?,
            None => KvConfig::new(),
        };
        let mut sources: BTreeMap<String, &'static str> = file.iter().map(|(k, _)| (k.to_string(), "file")).collect();
        let mut effective = file.merged(&flags);
        for (k, _) in flags.iter() {
            sources.insert(k.to_string(), "flag");
        }
        let seed_source = sources.get("seed").copied();
        let seed = effective.get("seed").map(str::to_string);
        if let (Some(seed), Some(src)) = (seed, seed_source) {
            for s in SEEDED_SECTIONS {
                let key = format!("{s}.seed");
                if src == "flag" || !effective.contains(&key) {
                    effective.set(&key, &seed);
                    sources.insert(key, src);
                }
            }
        }
        Ok(Self { effective, sources })
    }

    pub fn kv(&self) -> &KvConfig {
        &self.effective
    }

    pub fn section(&self, name: &str) -> KvConfig {
        self.effective.section(name)
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        Ok(self.effective.parse_or("seed", DEFAULT_SEED)?)
    }

    /// Every key that did not come from a default, with where it came from.
    pub fn sources(&self) -> &BTreeMap<String, &'static str> {
        &self.sources
    }

    /// Effective values for `keys` of a typed config, defaults included.
    pub fn snapshot(&self, prefix: &str, defaults: &KvConfig) -> BTreeMap<String, String> {
        let section = self.section(prefix);
        defaults
            .iter()
            .map(|(k, v)| (format!("{prefix}.{k}"), section.get(k).unwrap_or(v).to_string()))
            .chain(section.iter().map(|(k, v)| (format!("{prefix}.{k}"), v.to_string())))
            .collect()
    }
}
