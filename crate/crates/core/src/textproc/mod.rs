//! Language-aware text handling: normalization, tokenization, answer
//! categorization, answer containment and English question-prefix typing.
//!
//! Conventions (these fix metric values, so they are part of the contract):
//!
//! * `normalize` applies NFC, trims, collapses whitespace runs, strips trailing
//!   sentence punctuation (`. ? !`, their fullwidth forms, `。`, `।`, `॥`) and
//!   lowercases only languages with letter case.
//! * `tokenize` splits on whitespace and on every Unicode punctuation
//!   character except hyphens and apostrophes, which stay inside tokens.
//!   Chinese splits each Han ideograph into its own token; Thai runs are
//!   segmented with the dictionary in [`Lexicons`].
//! * Containment is exact on tokens. There is no stemming, so inflected forms
//!   never match their base form.

mod lexicon;
mod prefix;
mod thai;

pub use lexicon::{LanguageLexicon, Lexicons, Polarity};
pub use prefix::{classify_question, QuestionPrefix};
pub use thai::ThaiDictionary;

use std::collections::HashMap;

use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

use crate::lang::LanguageCode;
use crate::types::AnswerCategory;

pub(crate) fn is_terminal_punct(c: char) -> bool {
    matches!(
        c,
        '.' | '?' | '!' | '\u{FF0E}' | '\u{FF1F}' | '\u{FF01}' | '\u{3002}' | '\u{0964}' | '\u{0965}'
    )
}

pub fn normalize(text: &str, lang: LanguageCode) -> String {
    let mut s: String = text.nfc().collect();
    if lang.has_letter_case() {
        s = s.to_lowercase().nfc().collect();
    }
    let collapsed = s.split_whitespace().collect::<Vec<_>>().join(" ");
    let stripped = collapsed.trim_end_matches(|c: char| is_terminal_punct(c) || c.is_whitespace());
    stripped.nfc().collect()
}

fn is_token_internal(c: char) -> bool {
    matches!(c, '-' | '\'' | '\u{2010}' | '\u{2011}' | '\u{2019}')
}

pub(crate) fn is_separator(c: char) -> bool {
    if c.is_whitespace() {
        return true;
    }
    if is_token_internal(c) {
        return false;
    }
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

fn is_han(c: char) -> bool {
    matches!(c as u32,
        0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xF900..=0xFAFF
        | 0x20000..=0x2A6DF
        | 0x2A700..=0x2EBEF
        | 0x30000..=0x323AF
        | 0x3007)
}

fn is_thai_letter(c: char) -> bool {
    // Thai block without the Thai digits, which group like other digits.
    matches!(c as u32, 0x0E01..=0x0E4F | 0x0E5A..=0x0E5B)
}

/// A token sequence for one language. Tokens are non-empty and contain no
/// whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TokenSeq {
    pub tokens: Vec<String>,
    pub lang: LanguageCode,
}

impl TokenSeq {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains_run(&self, needle: &TokenSeq) -> bool {
        !needle.is_empty()
            && needle.len() <= self.len()
            && self.tokens.windows(needle.len()).any(|w| w == needle.tokens.as_slice())
    }

    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

impl Lexicons {
    /// Tokenizes already-normalized text.
    pub fn tokenize(&self, text: &str, lang: LanguageCode) -> TokenSeq {
        let mut tokens = Vec::new();
        for piece in text.split(is_separator).filter(|p| !p.is_empty()) {
            if piece.chars().all(is_token_internal) {
                continue;
            }
            match lang {
                LanguageCode::Zh => split_runs(
                    piece,
                    is_han,
                    |run, out| {
                        out.extend(run.chars().map(String::from));
                    },
                    &mut tokens,
                ),
                LanguageCode::Th => split_runs(
                    piece,
                    is_thai_letter,
                    |run, out| {
                        out.extend(self.thai().segment(run).into_iter().map(String::from));
                    },
                    &mut tokens,
                ),
                _ => tokens.push(piece.to_string()),
            }
        }
        TokenSeq { tokens, lang }
    }

    /// `tokenize(normalize(text))`.
    pub fn normalized_tokens(&self, text: &str, lang: LanguageCode) -> TokenSeq {
        self.tokenize(&normalize(text, lang), lang)
    }

    /// True iff the answer's tokens occur as a contiguous run in the
    /// caption's tokens.
    pub fn answer_in_caption(&self, answer: &str, caption: &str, lang: LanguageCode) -> bool {
        let a = self.normalized_tokens(answer, lang);
        let c = self.normalized_tokens(caption, lang);
        c.contains_run(&a)
    }

    pub fn answer_category(&self, answer: &str, lang: LanguageCode) -> AnswerCategory {
        let norm = normalize(answer, lang);
        let lex = self.lang(lang);
        if lex.polarity(&norm).is_some() {
            AnswerCategory::Boolean
        } else if is_numeral(&norm) || lex.number_value(&norm).is_some() {
            AnswerCategory::Numeric
        } else if lex.is_color(&norm) {
            AnswerCategory::Color
        } else {
            AnswerCategory::Other
        }
    }

    /// SQuAD-style bag-of-tokens F1 between two strings.
    pub fn token_f1(&self, predicted: &str, reference: &str, lang: LanguageCode) -> f64 {
        let p = self.normalized_tokens(predicted, lang);
        let r = self.normalized_tokens(reference, lang);
        if p.is_empty() || r.is_empty() {
            return if p.is_empty() && r.is_empty() { 1.0 } else { 0.0 };
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for t in &r.tokens {
            *counts.entry(t.as_str()).or_default() += 1;
        }
        let mut overlap = 0usize;
        for t in &p.tokens {
            if let Some(c) = counts.get_mut(t.as_str()) {
                if *c > 0 {
                    *c -= 1;
                    overlap += 1;
                }
            }
        }
        if overlap == 0 {
            return 0.0;
        }
        let precision = overlap as f64 / p.len() as f64;
        let recall = overlap as f64 / r.len() as f64;
        2.0 * precision * recall / (precision + recall)
    }
}

fn split_runs(
    piece: &str,
    special: fn(char) -> bool,
    mut handle: impl FnMut(&str, &mut Vec<String>),
    out: &mut Vec<String>,
) {
    let mut start = 0;
    let mut in_special: Option<bool> = None;
    for (i, c) in piece.char_indices() {
        let s = special(c);
        // combining marks stay with whatever run they follow
        let s = if is_mark(c) { in_special.unwrap_or(s) } else { s };
        match in_special {
            Some(prev) if prev != s => {
                flush(&piece[start..i], prev, &mut handle, out);
                start = i;
            }
            _ => {}
        }
        in_special = Some(s);
    }
    if let Some(prev) = in_special {
        flush(&piece[start..], prev, &mut handle, out);
    }
}

fn flush(run: &str, special: bool, handle: &mut impl FnMut(&str, &mut Vec<String>), out: &mut Vec<String>) {
    if run.is_empty() {
        return;
    }
    if special {
        handle(run, out);
    } else {
        out.push(run.to_string());
    }
}

fn is_mark(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::NonspacingMark | GeneralCategory::SpacingMark | GeneralCategory::EnclosingMark
    )
}

/// Decimal digits in any script.
pub fn is_numeral(normalized: &str) -> bool {
    !normalized.is_empty()
        && normalized
            .chars()
            .all(|c| get_general_category(c) == GeneralCategory::DecimalNumber)
}

pub fn tokenize(text: &str, lang: LanguageCode) -> TokenSeq {
    Lexicons::bundled().tokenize(text, lang)
}

pub fn answer_in_caption(answer: &str, caption: &str, lang: LanguageCode) -> bool {
    Lexicons::bundled().answer_in_caption(answer, caption, lang)
}

pub fn answer_category(answer: &str, lang: LanguageCode) -> AnswerCategory {
    Lexicons::bundled().answer_category(answer, lang)
}
