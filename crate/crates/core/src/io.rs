//! JSONL readers and writers for captions, candidates and benchmarks.
//!
//! Every file is UTF-8, one JSON object per line, no BOM. Loaders are total:
//! each line either parses or yields exactly one [`LineDiagnostic`].

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use unicode_normalization::UnicodeNormalization;

use crate::error::{CoreError, LineDiagnostic, Result};
use crate::types::{Benchmark, BenchmarkExample, CandidateQA, Caption};

/// Parses JSONL text. Returns every record that parsed alongside one
/// diagnostic per line that did not.
pub fn parse_jsonl<T: DeserializeOwned>(
    body: &str,
    check: impl Fn(&T) -> std::result::Result<(), (Option<&'static str>, String)>,
) -> (Vec<T>, Vec<LineDiagnostic>) {
    let body = body.strip_prefix('\u{feff}').unwrap_or(body);
    let mut records = Vec::new();
    let mut diags = Vec::new();
    for (i, line) in body.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            diags.push(LineDiagnostic {
                line: line_no,
                field: None,
                message: "empty line".into(),
            });
            continue;
        }
        let de = &mut serde_json::Deserializer::from_str(line);
        match serde_path_to_error::deserialize::<_, T>(de) {
            Ok(rec) => match check(&rec) {
                Ok(()) => records.push(rec),
                Err((field, message)) => diags.push(LineDiagnostic {
                    line: line_no,
                    field: field.map(String::from),
                    message,
                }),
            },
            Err(err) => {
                let path = err.path().to_string();
                let inner = err.into_inner();
                let message = inner.to_string();
                let field = if path != "." && !path.is_empty() {
                    Some(path)
                } else {
                    missing_field(&message)
                };
                diags.push(LineDiagnostic {
                    line: line_no,
                    field,
                    message,
                });
            }
        }
    }
    (records, diags)
}

fn missing_field(message: &str) -> Option<String> {
    let rest = message.strip_prefix("missing field `")?;
    rest.split('`').next().map(String::from)
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CoreError::io(path, e))
}

fn strict<T>(parsed: (Vec<T>, Vec<LineDiagnostic>)) -> Result<Vec<T>> {
    let (records, diags) = parsed;
    if diags.is_empty() {
        Ok(records)
    } else {
        Err(CoreError::Schema(diags))
    }
}

fn check_caption(c: &Caption) -> std::result::Result<(), (Option<&'static str>, String)> {
    if c.text.trim().is_empty() {
        return Err((Some("text"), "caption text is empty".into()));
    }
    Ok(())
}

fn check_example(e: &BenchmarkExample) -> std::result::Result<(), (Option<&'static str>, String)> {
    if e.answers.is_empty() {
        return Err((Some("answers"), "answers list is empty".into()));
    }
    if e.id.is_empty() {
        return Err((Some("id"), "id is empty".into()));
    }
    Ok(())
}

pub fn parse_captions(body: &str) -> (Vec<Caption>, Vec<LineDiagnostic>) {
    parse_jsonl(body, check_caption)
}

pub fn load_captions(path: &Path) -> Result<Vec<Caption>> {
    strict(parse_captions(&read_to_string(path)?))
}

pub fn parse_benchmark(body: &str) -> Result<Benchmark> {
    Benchmark::new(strict(parse_jsonl(body, check_example))?)
}

pub fn load_benchmark(path: &Path) -> Result<Benchmark> {
    parse_benchmark(&read_to_string(path)?)
}

pub fn load_candidates(path: &Path) -> Result<Vec<CandidateQA>> {
    strict(parse_jsonl(&read_to_string(path)?, |c: &CandidateQA| {
        c.validate().map_err(|e| (None, e.to_string()))
    }))
}

fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// NFC-normalizes every text field of an example.
pub fn nfc_example(e: &BenchmarkExample) -> BenchmarkExample {
    BenchmarkExample {
        question: nfc(&e.question),
        answers: e.answers.iter().map(|a| nfc(a)).collect(),
        english_question: e.english_question.as_deref().map(nfc),
        ..e.clone()
    }
}

/// Serializes records as JSONL. Newlines inside strings are escaped by the
/// JSON encoder, so each record stays on one line.
pub fn to_jsonl<T: Serialize>(records: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(&r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn benchmark_to_jsonl(benchmark: &Benchmark) -> String {
    to_jsonl(benchmark.examples().iter().map(nfc_example))
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> Result<()> {
    let file = File::create(path).map_err(|e| CoreError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, &r).map_err(|e| CoreError::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| CoreError::io(path, e))?;
    }
    w.flush().map_err(|e| CoreError::io(path, e))
}

pub fn write_benchmark(benchmark: &Benchmark, path: &Path) -> Result<()> {
    write_jsonl(path, benchmark.examples().iter().map(nfc_example))
}

pub fn write_captions(captions: &[Caption], path: &Path) -> Result<()> {
    write_jsonl(
        path,
        captions.iter().map(|c| Caption {
            text: nfc(&c.text),
            english_text: c.english_text.as_deref().map(nfc),
            ..c.clone()
        }),
    )
}
