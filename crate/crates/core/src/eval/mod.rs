//! Exact-match accuracy, CIDEr and ROUGE-L over a benchmark, and the
//! per-language report tables.
//!
//! Every ground-truth answer of an example counts as one reference. Metric
//! summation runs in sorted example-id order so scores are bit-stable.

mod metrics;

pub use metrics::{cider_corpus, lcs_len, rouge_l_example, CiderVariant, CIDER_D_SIGMA, MAX_NGRAM, ROUGE_BETA};

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::io::parse_jsonl;
use crate::lang::LanguageCode;
use crate::textproc::{normalize, Lexicons};
use crate::types::{Benchmark, BenchmarkExample};

pub fn exact_match(prediction: &str, answers: &[String], lang: LanguageCode) -> bool {
    let p = normalize(prediction, lang);
    answers.iter().any(|a| normalize(a, lang) == p)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub example_id: String,
    pub answer: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredictionSet {
    pub model_name: String,
    pub entries: BTreeMap<String, String>,
}

impl PredictionSet {
    pub fn new(model_name: impl Into<String>) -> Self {
        PredictionSet {
            model_name: model_name.into(),
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, example_id: impl Into<String>, answer: impl Into<String>) {
        self.entries.insert(example_id.into(), answer.into());
    }

    /// Parses `predictions.jsonl` rows `{example_id, answer}`. A repeated
    /// example id is a schema error.
    pub fn parse(body: &str, model_name: impl Into<String>) -> Result<Self> {
        let seen = RefCell::new(HashSet::new());
        let (records, diags) = parse_jsonl::<PredictionRecord>(body, |r| {
            if seen.borrow_mut().insert(r.example_id.clone()) {
                Ok(())
            } else {
                Err((
                    Some("example_id"),
                    format!("duplicate prediction for `{}`", r.example_id),
                ))
            }
        });
        if !diags.is_empty() {
            return Err(CoreError::Schema(diags));
        }
        let mut set = PredictionSet::new(model_name);
        set.entries = records.into_iter().map(|r| (r.example_id, r.answer)).collect();
        Ok(set)
    }

    pub fn load(path: &Path, model_name: impl Into<String>) -> Result<Self> {
        let body = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
        Self::parse(&body, model_name)
    }

    /// Prediction for an example, empty when missing.
    pub fn answer(&self, example_id: &str) -> &str {
        self.entries.get(example_id).map_or("", String::as_str)
    }
}

fn lang_examples(benchmark: &Benchmark, lang: LanguageCode) -> Vec<&BenchmarkExample> {
    let mut v: Vec<_> = benchmark.for_lang(lang).collect();
    v.sort_by(|a, b| a.id.cmp(&b.id));
    v
}

/// Exact-match accuracy for one language; `None` when it has no examples.
pub fn accuracy(predictions: &PredictionSet, benchmark: &Benchmark, lang: LanguageCode) -> Option<f64> {
    let ex = lang_examples(benchmark, lang);
    if ex.is_empty() {
        return None;
    }
    let hits = ex
        .iter()
        .filter(|e| exact_match(predictions.answer(&e.id), &e.answers, lang))
        .count();
    Some(hits as f64 / ex.len() as f64)
}

fn tokenized(
    predictions: &PredictionSet,
    benchmark: &Benchmark,
    lang: LanguageCode,
    lexicons: &Lexicons,
) -> (Vec<Vec<String>>, Vec<Vec<Vec<String>>>) {
    let ex = lang_examples(benchmark, lang);
    let cands = ex
        .iter()
        .map(|e| lexicons.normalized_tokens(predictions.answer(&e.id), lang).tokens)
        .collect();
    let refs = ex
        .iter()
        .map(|e| {
            e.answers
                .iter()
                .map(|a| lexicons.normalized_tokens(a, lang).tokens)
                .collect()
        })
        .collect();
    (cands, refs)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("corpus too small for CIDEr: {lang} has {count} example(s), need at least 2")]
pub struct CorpusTooSmall {
    pub lang: LanguageCode,
    pub count: usize,
}

pub fn cider(
    predictions: &PredictionSet,
    benchmark: &Benchmark,
    lang: LanguageCode,
    variant: CiderVariant,
) -> std::result::Result<f64, CorpusTooSmall> {
    let (c, r) = tokenized(predictions, benchmark, lang, Lexicons::bundled());
    cider_corpus(&c, &r, variant).ok_or(CorpusTooSmall { lang, count: c.len() })
}

/// Mean ROUGE-L over the language's examples; `None` when it has none.
pub fn rouge_l(predictions: &PredictionSet, benchmark: &Benchmark, lang: LanguageCode) -> Option<f64> {
    let (c, r) = tokenized(predictions, benchmark, lang, Lexicons::bundled());
    if c.is_empty() {
        return None;
    }
    Some(c.iter().zip(&r).map(|(c, r)| rouge_l_example(c, r)).sum::<f64>() / c.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    Cider,
    RougeL,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Accuracy, Metric::Cider, Metric::RougeL];

    pub fn label(self) -> &'static str {
        match self {
            Metric::Accuracy => "Accuracy",
            Metric::Cider => "CIDEr",
            Metric::RougeL => "ROUGE-L",
        }
    }
}

impl FromStr for Metric {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "em" | "accuracy" => Ok(Metric::Accuracy),
            "cider" => Ok(Metric::Cider),
            "rouge" | "rouge_l" | "rouge-l" => Ok(Metric::RougeL),
            other => Err(CoreError::Invalid(format!(
                "unknown metric `{other}` (em, cider, rouge)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanguageScores {
    pub examples: usize,
    pub accuracy: f64,
    /// Absent when the language has fewer than two examples.
    pub cider: Option<f64>,
    pub rouge_l: f64,
}

impl LanguageScores {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Accuracy => Some(self.accuracy),
            Metric::Cider => self.cider,
            Metric::RougeL => Some(self.rouge_l),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub model_name: String,
    pub languages: BTreeMap<LanguageCode, LanguageScores>,
    /// Benchmark examples without a prediction, scored as empty answers.
    pub missing_predictions: usize,
    /// Predictions whose id is not in the benchmark; ignored.
    pub unknown_predictions: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EvalOptions {
    pub cider_variant: CiderVariant,
}

const RANGE_EPS: f64 = 1e-9;

/// All metrics for every language in the benchmark.
pub fn evaluate(predictions: &PredictionSet, benchmark: &Benchmark, options: EvalOptions) -> EvalResult {
    let lexicons = Lexicons::bundled();
    let mut warnings = Vec::new();
    let missing = benchmark
        .examples()
        .iter()
        .filter(|e| !predictions.entries.contains_key(&e.id))
        .count();
    let unknown = predictions
        .entries
        .keys()
        .filter(|id| benchmark.get(id).is_none())
        .count();
    if missing > 0 {
        warnings.push(format!(
            "{missing} example(s) without a prediction scored as empty answers"
        ));
    }
    if unknown > 0 {
        warnings.push(format!("{unknown} prediction(s) for unknown example ids ignored"));
    }
    let mut languages = BTreeMap::new();
    for lang in benchmark.languages() {
        let (c, r) = tokenized(predictions, benchmark, lang, lexicons);
        let n = c.len();
        let acc = accuracy(predictions, benchmark, lang).unwrap_or(0.0);
        let rouge = c.iter().zip(&r).map(|(c, r)| rouge_l_example(c, r)).sum::<f64>() / n as f64;
        let cider = cider_corpus(&c, &r, options.cider_variant);
        if cider.is_none() {
            warnings.push(CorpusTooSmall { lang, count: n }.to_string());
        }
        assert!((-RANGE_EPS..=1.0 + RANGE_EPS).contains(&acc), "accuracy {acc}");
        assert!((-RANGE_EPS..=1.0 + RANGE_EPS).contains(&rouge), "rouge-l {rouge}");
        if let Some(c) = cider {
            assert!((-RANGE_EPS..=10.0 + RANGE_EPS).contains(&c), "cider {c}");
        }
        languages.insert(
            lang,
            LanguageScores {
                examples: n,
                accuracy: acc,
                cider,
                rouge_l: rouge,
            },
        );
    }
    EvalResult {
        model_name: predictions.model_name.clone(),
        languages,
        missing_predictions: missing,
        unknown_predictions: unknown,
        warnings,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(CoreError::Invalid(format!(
                "unknown format `{other}` (text, csv, markdown)"
            ))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Text => "text",
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "markdown",
        })
    }
}

/// A score as a percentage with one decimal (CIDEr is scaled the same way).
pub fn percent_cell(value: f64) -> String {
    format!("{:.1}", value * 100.0)
}

/// One row per (model, metric), one column per language. Missing values
/// render as `-`.
pub fn render_report(results: &[EvalResult], metrics: &[Metric], format: ReportFormat) -> String {
    let langs: BTreeSet<LanguageCode> = results.iter().flat_map(|r| r.languages.keys().copied()).collect();
    let mut header = vec!["model".to_string(), "metric".to_string()];
    header.extend(langs.iter().map(|l| l.to_string()));
    let mut rows: Vec<Vec<String>> = Vec::new();
    for r in results {
        for &m in metrics {
            let mut row = vec![r.model_name.clone(), m.label().to_string()];
            row.extend(langs.iter().map(|l| {
                r.languages
                    .get(l)
                    .and_then(|s| s.get(m))
                    .map_or_else(|| "-".to_string(), percent_cell)
            }));
            rows.push(row);
        }
    }
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&header).expect("in-memory csv");
            for row in &rows {
                w.write_record(row).expect("in-memory csv");
            }
            String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
        }
        ReportFormat::Markdown => {
            let mut out = format!("| {} |\n", header.join(" | "));
            let _ = writeln!(
                out,
                "|{}|",
                header
                    .iter()
                    .enumerate()
                    .map(|(i, _)| if i < 2 { "---" } else { "---:" })
                    .collect::<Vec<_>>()
                    .join("|")
            );
            for row in &rows {
                let _ = writeln!(out, "| {} |", row.join(" | "));
            }
            out
        }
        ReportFormat::Text => {
            let widths: Vec<usize> = (0..header.len())
                .map(|j| {
                    rows.iter()
                        .map(|r| r[j].len())
                        .chain([header[j].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let mut out = String::new();
            for row in std::iter::once(&header).chain(rows.iter()) {
                let mut line = String::new();
                for (j, (cell, w)) in row.iter().zip(&widths).enumerate() {
                    if j > 0 {
                        line.push_str("  ");
                    }
                    if j < 2 {
                        let _ = write!(line, "{cell:<w$}");
                    } else {
                        let _ = write!(line, "{cell:>w$}");
                    }
                }
                out.push_str(line.trim_end());
                out.push('\n');
            }
            out
        }
    }
}
