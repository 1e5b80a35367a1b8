//! `--config` overlay. Flags win over the file, the file wins over defaults.
//!
//! ```toml
//! seed = 7
//!
//! [generate]
//! backends = "backends.toml"
//! target_lang = "fr"
//! parallelism = 8
//! directqg = true
//! match_rule = "normalized_exact"
//!
//! [annotate]
//! queue = "queue"
//! host = "127.0.0.1"
//! port = 8080
//! quorum = 2
//! lease_ttl_secs = 1800
//!
//! [adapt]
//! backends = "backends.toml"
//! langs = ["fr", "ro"]
//! translate_answers = true
//!
//! [evaluate]
//! metrics = ["em", "cider", "rouge"]
//! format = "markdown"
//! cider_variant = "d"
//! ```

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub generate: GenerateSection,
    pub annotate: AnnotateSection,
    pub adapt: AdaptSection,
    pub evaluate: EvaluateSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSection {
    pub backends: Option<PathBuf>,
    pub target_lang: Option<String>,
    pub parallelism: Option<usize>,
    pub directqg: Option<bool>,
    pub match_rule: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotateSection {
    pub queue: Option<PathBuf>,
    pub host: Option<String>,
    pub port: Option<u16>,
    pub quorum: Option<usize>,
    pub lease_ttl_secs: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptSection {
    pub backends: Option<PathBuf>,
    pub langs: Option<Vec<String>>,
    pub translate_answers: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub metrics: Option<Vec<String>>,
    pub format: Option<String>,
    pub cider_variant: Option<String>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Relative paths in the file resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("config {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.generate.backends,
            &mut cfg.annotate.queue,
            &mut cfg.adapt.backends,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}
