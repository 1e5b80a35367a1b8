//! Language registry.
//!
//! Every language the toolkit knows about is a variant of [`LanguageCode`].
//! The seven benchmark languages come first; the remaining tags are only used
//! by the adaptation transforms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LanguageCode {
    En,
    Fr,
    Hi,
    Iw,
    Ro,
    Th,
    Zh,
    Bn,
    De,
    Id,
    Ko,
    Pt,
    Ru,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Script {
    Latin,
    Devanagari,
    Hebrew,
    Thai,
    Han,
    Bengali,
    Hangul,
    Cyrillic,
}

/// Static properties recorded for each registered language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LanguageInfo {
    pub code: LanguageCode,
    pub name: &'static str,
    pub has_letter_case: bool,
    pub whitespace_delimited: bool,
    pub script: Script,
}

const REGISTRY: [LanguageInfo; 13] = [
    info(LanguageCode::En, "English", true, true, Script::Latin),
    info(LanguageCode::Fr, "French", true, true, Script::Latin),
    info(LanguageCode::Hi, "Hindi", false, true, Script::Devanagari),
    info(LanguageCode::Iw, "Hebrew", false, true, Script::Hebrew),
    info(LanguageCode::Ro, "Romanian", true, true, Script::Latin),
    info(LanguageCode::Th, "Thai", false, false, Script::Thai),
    info(LanguageCode::Zh, "Chinese", false, false, Script::Han),
    info(LanguageCode::Bn, "Bengali", false, true, Script::Bengali),
    info(LanguageCode::De, "German", true, true, Script::Latin),
    info(LanguageCode::Id, "Indonesian", true, true, Script::Latin),
    info(LanguageCode::Ko, "Korean", false, true, Script::Hangul),
    info(LanguageCode::Pt, "Portuguese", true, true, Script::Latin),
    info(LanguageCode::Ru, "Russian", true, true, Script::Cyrillic),
];

const fn info(
    code: LanguageCode,
    name: &'static str,
    has_letter_case: bool,
    whitespace_delimited: bool,
    script: Script,
) -> LanguageInfo {
    LanguageInfo {
        code,
        name,
        has_letter_case,
        whitespace_delimited,
        script,
    }
}

impl LanguageCode {
    /// The seven languages of the benchmark, in report column order.
    pub const BENCHMARK: [LanguageCode; 7] = [
        LanguageCode::En,
        LanguageCode::Fr,
        LanguageCode::Hi,
        LanguageCode::Iw,
        LanguageCode::Ro,
        LanguageCode::Th,
        LanguageCode::Zh,
    ];

    /// All registered languages; the 13 adaptation-run languages.
    pub fn all() -> impl Iterator<Item = LanguageCode> {
        REGISTRY.iter().map(|i| i.code)
    }

    pub fn info(self) -> &'static LanguageInfo {
        &REGISTRY[self as usize]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LanguageCode::En => "en",
            LanguageCode::Fr => "fr",
            LanguageCode::Hi => "hi",
            LanguageCode::Iw => "iw",
            LanguageCode::Ro => "ro",
            LanguageCode::Th => "th",
            LanguageCode::Zh => "zh",
            LanguageCode::Bn => "bn",
            LanguageCode::De => "de",
            LanguageCode::Id => "id",
            LanguageCode::Ko => "ko",
            LanguageCode::Pt => "pt",
            LanguageCode::Ru => "ru",
        }
    }

    pub fn has_letter_case(self) -> bool {
        self.info().has_letter_case
    }

    pub fn whitespace_delimited(self) -> bool {
        self.info().whitespace_delimited
    }

    pub fn script(self) -> Script {
        self.info().script
    }
}

impl fmt::Display for LanguageCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LanguageCode {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        REGISTRY
            .iter()
            .find(|i| i.code.as_str() == s)
            .map(|i| i.code)
            .ok_or_else(|| CoreError::UnknownLanguage(s.to_string()))
    }
}

impl Serialize for LanguageCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for LanguageCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_order_matches_discriminants() {
        for (i, info) in REGISTRY.iter().enumerate() {
            assert_eq!(info.code as usize, i);
            assert_eq!(info.code.as_str().parse::<LanguageCode>().unwrap(), info.code);
        }
    }

    #[test]
    fn unknown_and_uppercase_tags_rejected() {
        assert!("xx".parse::<LanguageCode>().is_err());
        assert!("EN".parse::<LanguageCode>().is_err());
        assert!("".parse::<LanguageCode>().is_err());
    }

    #[test]
    fn case_and_whitespace_properties() {
        for l in [LanguageCode::Hi, LanguageCode::Iw, LanguageCode::Th, LanguageCode::Zh] {
            assert!(!l.has_letter_case(), "{l}");
        }
        assert!(!LanguageCode::Th.whitespace_delimited());
        assert!(!LanguageCode::Zh.whitespace_delimited());
        assert!(LanguageCode::Ro.whitespace_delimited());
        assert_eq!(LanguageCode::all().count(), 13);
    }

    #[test]
    fn serde_uses_tag() {
        let j = serde_json::to_string(&LanguageCode::Iw).unwrap();
        assert_eq!(j, "\"iw\"");
        let err = serde_json::from_str::<LanguageCode>("\"he\"").unwrap_err();
        assert!(err.to_string().contains("he"));
    }
}
