//! Corpus settings read by the acceptance harness.

use std::path::Path;

use serde::Deserialize;

use crate::gen::GenLimits;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSettings {
    pub first_seed: u64,
    pub seeds: u64,
    /// Opaque decisions explored per run.
    pub k: usize,
    pub fuel: usize,
    /// Seed `s` uses `profiles[s % profiles.len()]`.
    pub profiles: Vec<GenLimits>,
}

impl CorpusSettings {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// `(seed, limits)` for every program of the corpus.
    pub fn corpus(&self) -> impl Iterator<Item = (u64, &GenLimits)> {
        (self.first_seed..self.first_seed + self.seeds)
            .map(|s| (s, &self.profiles[(s % self.profiles.len() as u64) as usize]))
    }
}
