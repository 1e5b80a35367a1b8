//! Domain records shared by every stage: captions, generated candidates and
//! finalized benchmark examples.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{CoreError, Result};
use crate::lang::LanguageCode;

/// An image-grounded sentence in one language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Caption {
    pub image_id: String,
    pub lang: LanguageCode,
    pub text: String,
    /// English rendering of `text`; set once caption translation has run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub english_text: Option<String>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Caption {
    pub fn new(image_id: impl Into<String>, lang: LanguageCode, text: impl Into<String>) -> Self {
        Caption {
            image_id: image_id.into(),
            lang,
            text: text.into(),
            english_text: None,
            extra: Map::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.text.trim().is_empty() {
            return Err(CoreError::Invalid("caption text is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Transvq2a,
    Directqg,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Transvq2a => "transvq2a",
            Source::Directqg => "directqg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterRecord {
    pub filter: String,
    pub verdict: Verdict,
    pub detail: String,
}

/// A generated question-answer pair with its full provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateQA {
    pub id: String,
    pub image_id: String,
    pub lang: LanguageCode,
    pub english_question: String,
    pub english_answer: String,
    pub question: String,
    pub answer: String,
    pub source: Source,
    #[serde(default)]
    pub filter_trace: Vec<FilterRecord>,
    /// Original caption text the pair was generated from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption_lang: Option<LanguageCode>,
    /// English caption the question generator saw.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub english_caption: Option<String>,
}

impl CandidateQA {
    /// Content id: lowercase hex SHA-256 over the identifying fields,
    /// separated by U+001F.
    pub fn content_id(
        image_id: &str,
        lang: LanguageCode,
        source: Source,
        english_question: &str,
        english_answer: &str,
    ) -> String {
        let mut h = Sha256::new();
        for (i, part) in [
            image_id,
            lang.as_str(),
            source.as_str(),
            english_question,
            english_answer,
        ]
        .iter()
        .enumerate()
        {
            if i > 0 {
                h.update([0x1f]);
            }
            h.update(part.as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn rejection(&self) -> Option<&FilterRecord> {
        self.filter_trace.iter().find(|r| r.verdict == Verdict::Reject)
    }

    pub fn is_rejected(&self) -> bool {
        self.rejection().is_some()
    }

    /// Appends a filter verdict. The trace is closed once a reject is recorded.
    pub fn record(&mut self, filter: &str, verdict: Verdict, detail: impl Into<String>) -> Result<()> {
        if self.is_rejected() {
            return Err(CoreError::TraceClosed(filter.to_string()));
        }
        self.filter_trace.push(FilterRecord {
            filter: filter.to_string(),
            verdict,
            detail: detail.into(),
        });
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.source == Source::Transvq2a && (self.english_question.is_empty() || self.english_answer.is_empty()) {
            return Err(CoreError::Invalid(format!(
                "candidate {}: transvq2a candidates need english_question and english_answer",
                self.id
            )));
        }
        if let Some(pos) = self.filter_trace.iter().position(|r| r.verdict == Verdict::Reject) {
            if pos + 1 != self.filter_trace.len() {
                return Err(CoreError::Invalid(format!(
                    "candidate {}: filter entries after a reject",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerCategory {
    Boolean,
    Numeric,
    Color,
    Other,
}

impl AnswerCategory {
    pub fn is_standardized(self) -> bool {
        !matches!(self, AnswerCategory::Other)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AnswerCategory::Boolean => "boolean",
            AnswerCategory::Numeric => "numeric",
            AnswerCategory::Color => "color",
            AnswerCategory::Other => "other",
        }
    }
}

impl fmt::Display for AnswerCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A finalized question with its equally valid ground-truth answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkExample {
    pub id: String,
    pub image_id: String,
    pub lang: LanguageCode,
    pub question: String,
    /// First entry is the primary answer.
    pub answers: Vec<String>,
    pub category: AnswerCategory,
    #[serde(default)]
    pub collection_flag: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub english_question: Option<String>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl BenchmarkExample {
    pub fn primary_answer(&self) -> &str {
        &self.answers[0]
    }
}

/// A collection of examples with unique ids and a per-language index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Benchmark {
    examples: Vec<BenchmarkExample>,
    by_lang: BTreeMap<LanguageCode, Vec<usize>>,
}

impl Benchmark {
    pub fn new(examples: Vec<BenchmarkExample>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(examples.len());
        let mut by_lang: BTreeMap<LanguageCode, Vec<usize>> = BTreeMap::new();
        for (i, ex) in examples.iter().enumerate() {
            if !seen.insert(ex.id.as_str()) {
                return Err(CoreError::DuplicateId(ex.id.clone()));
            }
            if ex.answers.is_empty() {
                return Err(CoreError::Invalid(format!("example {}: empty answers list", ex.id)));
            }
            by_lang.entry(ex.lang).or_default().push(i);
        }
        Ok(Benchmark { examples, by_lang })
    }

    pub fn examples(&self) -> &[BenchmarkExample] {
        &self.examples
    }

    pub fn into_examples(self) -> Vec<BenchmarkExample> {
        self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Languages present, in registry order.
    pub fn languages(&self) -> impl Iterator<Item = LanguageCode> + '_ {
        self.by_lang.keys().copied()
    }

    pub fn for_lang(&self, lang: LanguageCode) -> impl Iterator<Item = &BenchmarkExample> {
        self.by_lang
            .get(&lang)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(move |&i| &self.examples[i])
    }

    pub fn count(&self, lang: LanguageCode) -> usize {
        self.by_lang.get(&lang).map_or(0, Vec::len)
    }

    pub fn get(&self, id: &str) -> Option<&BenchmarkExample> {
        self.examples.iter().find(|e| e.id == id)
    }
}
