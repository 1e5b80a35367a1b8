//! Backend bindings file (TOML).
//!
//! ```toml
//! translator = "reference"                  # or an http(s) endpoint URL
//! qg = "reference"
//! qa = "http://127.0.0.1:8500/qa"
//! directqg = "reference"
//!
//! [remote]
//! timeout_secs = 30
//! retries = 2
//! backoff_ms = 250
//! concurrent_safe = false
//!
//! [reference]
//! lexicon_dir = "data/lexicons-root"        # holds lexicons/<lang>/ and dict/th.txt
//! translation_dir = "data/translation"      # holds <src>-<tgt>.tsv
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{BackendError, BackendResult, LexiconTranslator, TranslationTable};
use crate::textproc::Lexicons;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum BackendSpec {
    #[default]
    Reference,
    Remote(String),
}

impl BackendSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "reference" {
            Ok(BackendSpec::Reference)
        } else if s.starts_with("http://") || s.starts_with("https://") {
            Ok(BackendSpec::Remote(s.to_string()))
        } else {
            Err(format!("expected \"reference\" or an http(s) URL, got `{s}`"))
        }
    }
}

impl fmt::Display for BackendSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendSpec::Reference => f.write_str("reference"),
            BackendSpec::Remote(url) => f.write_str(url),
        }
    }
}

impl Serialize for BackendSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BackendSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BackendSpec::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteConfig {
    pub timeout_secs: u64,
    pub retries: u32,
    /// Base delay; attempt `k` waits `backoff_ms * 2^k`.
    pub backoff_ms: u64,
    pub concurrent_safe: bool,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            timeout_secs: 30,
            retries: 2,
            backoff_ms: 250,
            concurrent_safe: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceConfig {
    pub lexicon_dir: Option<PathBuf>,
    pub translation_dir: Option<PathBuf>,
}

impl ReferenceConfig {
    pub fn lexicons(&self) -> BackendResult<Arc<Lexicons>> {
        match &self.lexicon_dir {
            None => Ok(Lexicons::shared()),
            Some(dir) => Lexicons::load_dir(dir)
                .map(Arc::new)
                .map_err(|e| BackendError::Config(e.to_string())),
        }
    }

    pub fn tables(&self) -> BackendResult<Vec<TranslationTable>> {
        match &self.translation_dir {
            None => Ok(LexiconTranslator::bundled_tables()),
            Some(dir) => LexiconTranslator::load_tables(dir).map_err(|e| BackendError::Config(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendsConfig {
    pub translator: BackendSpec,
    pub qg: BackendSpec,
    pub qa: BackendSpec,
    pub directqg: BackendSpec,
    pub remote: RemoteConfig,
    pub reference: ReferenceConfig,
}

impl BackendsConfig {
    pub fn parse(text: &str) -> BackendResult<Self> {
        toml::from_str(text).map_err(|e| BackendError::Config(e.to_string()))
    }

    /// Loads a config file. Relative reference paths resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> BackendResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.reference.lexicon_dir, &mut cfg.reference.translation_dir]
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_all_reference() {
        let cfg = BackendsConfig::parse("").unwrap();
        assert_eq!(cfg, BackendsConfig::default());
        assert_eq!(cfg.remote.timeout_secs, 30);
        assert_eq!(cfg.remote.retries, 2);
    }

    #[test]
    fn remote_binding_and_errors() {
        let cfg = BackendsConfig::parse("qa = \"http://localhost:9/qa\"\n[remote]\nretries = 0\n").unwrap();
        assert_eq!(cfg.qa, BackendSpec::Remote("http://localhost:9/qa".into()));
        assert_eq!(cfg.remote.retries, 0);
        assert!(BackendsConfig::parse("qa = \"ftp://x\"").is_err());
        assert!(BackendsConfig::parse("bogus = 1").is_err());
    }

    #[test]
    fn relative_paths_resolve_against_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.toml");
        std::fs::write(&path, "[reference]\ntranslation_dir = \"tables\"\n").unwrap();
        let cfg = BackendsConfig::load(&path).unwrap();
        assert_eq!(cfg.reference.translation_dir, Some(dir.path().join("tables")));
    }
}
