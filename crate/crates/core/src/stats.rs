//! Benchmark composition: per-language counts and question-type shares.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::lang::LanguageCode;
use crate::textproc::{classify_question, QuestionPrefix};
use crate::types::Benchmark;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanguageStats {
    pub count: usize,
    /// Examples per prefix, in [`QuestionPrefix::ALL`] order.
    pub prefix_counts: Vec<usize>,
    /// Shares in tenths of a percent, summing to exactly 1000.
    pub prefix_tenths: Vec<u32>,
}

impl LanguageStats {
    pub fn percent(&self, prefix: QuestionPrefix) -> f64 {
        let idx = QuestionPrefix::ALL
            .iter()
            .position(|p| *p == prefix)
            .expect("prefix in table");
        f64::from(self.prefix_tenths[idx]) / 10.0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StatsReport {
    pub languages: BTreeMap<LanguageCode, LanguageStats>,
}

impl StatsReport {
    pub fn total(&self) -> usize {
        self.languages.values().map(|l| l.count).sum()
    }

    /// Counts block followed by the prefix-share table, one column per
    /// language.
    pub fn render_text(&self) -> String {
        let langs: Vec<_> = self.languages.keys().copied().collect();
        let mut out = String::new();
        let _ = write!(out, "{:<16}", "");
        for l in &langs {
            let _ = write!(out, "{:>8}", l.as_str());
        }
        out.push('\n');
        let _ = write!(out, "{:<16}", "# examples");
        for l in &langs {
            let _ = write!(out, "{:>8}", self.languages[l].count);
        }
        out.push('\n');
        for (i, p) in QuestionPrefix::ALL.iter().enumerate() {
            let label = if *p == QuestionPrefix::Other {
                "other".to_string()
            } else {
                format!("\"{}\"", p.as_str())
            };
            let _ = write!(out, "{label:<16}");
            for l in &langs {
                let t = self.languages[l].prefix_tenths[i];
                let _ = write!(out, "{:>8}", format!("{}.{}", t / 10, t % 10));
            }
            out.push('\n');
        }
        out
    }
}

/// Largest-remainder apportionment of 1000 tenths over `counts`; ties go to
/// the earlier bucket. Returns all zeros for an empty total.
pub fn apportion_tenths(counts: &[usize]) -> Vec<u32> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return vec![0; counts.len()];
    }
    let mut out: Vec<u32> = counts.iter().map(|&c| (c * 1000 / total) as u32).collect();
    let assigned: u32 = out.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = counts[a] * 1000 % total;
        let rb = counts[b] * 1000 % total;
        rb.cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take((1000 - assigned) as usize) {
        out[i] += 1;
    }
    out
}

/// Per-language counts and question-prefix distribution. The prefix is taken
/// from the stored English source question when present.
pub fn dataset_stats(benchmark: &Benchmark) -> StatsReport {
    let mut languages = BTreeMap::new();
    for lang in benchmark.languages() {
        let mut prefix_counts = vec![0usize; QuestionPrefix::ALL.len()];
        let mut count = 0;
        for ex in benchmark.for_lang(lang) {
            let q = ex.english_question.as_deref().unwrap_or(&ex.question);
            let p = classify_question(q);
            let idx = QuestionPrefix::ALL
                .iter()
                .position(|x| *x == p)
                .expect("prefix in table");
            prefix_counts[idx] += 1;
            count += 1;
        }
        let prefix_tenths = apportion_tenths(&prefix_counts);
        languages.insert(
            lang,
            LanguageStats {
                count,
                prefix_counts,
                prefix_tenths,
            },
        );
    }
    StatsReport { languages }
}
