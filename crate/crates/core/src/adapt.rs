//! Translate-Train dataset construction and Translate-Test inference.
//!
//! Prompts have the form `Answer in <code>: <question>`. Language codes never
//! contain `": "`, so the first occurrence separates code from question.

use serde::{Deserialize, Serialize};

use crate::backends::{BackendResult, Translator};
use crate::lang::LanguageCode;

pub const PROMPT_PREFIX: &str = "Answer in ";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptedExample {
    pub prompt: String,
    pub target_answer: String,
    pub lang: LanguageCode,
}

pub fn build_prompt(lang: LanguageCode, question: &str) -> String {
    format!("{PROMPT_PREFIX}{}: {question}", lang.as_str())
}

/// Inverse of [`build_prompt`].
pub fn parse_prompt(prompt: &str) -> Option<(LanguageCode, &str)> {
    let rest = prompt.strip_prefix(PROMPT_PREFIX)?;
    let (code, question) = rest.split_once(": ")?;
    Some((code.parse().ok()?, question))
}

/// An English training pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceExample {
    pub question: String,
    pub answer: String,
    #[serde(default = "english")]
    pub lang: LanguageCode,
}

fn english() -> LanguageCode {
    LanguageCode::En
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainOptions {
    /// When false, answers stay in English and examples carry `lang = en`
    /// (the cross-lingual setting).
    pub translate_answers: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            translate_answers: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedExample {
    pub index: usize,
    pub lang: LanguageCode,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TrainOutput {
    pub examples: Vec<PromptedExample>,
    pub skipped: Vec<SkippedExample>,
}

/// Translates every English example into each target language. An English
/// target copies the originals. Failures skip that (example, language) pair.
pub fn translate_train(
    examples: &[SourceExample],
    target_langs: &[LanguageCode],
    translator: &dyn Translator,
    options: TrainOptions,
) -> TrainOutput {
    let en = LanguageCode::En;
    let mut out = TrainOutput::default();
    for &lang in target_langs {
        for (index, ex) in examples.iter().enumerate() {
            let translated = (|| -> BackendResult<PromptedExample> {
                let question = translator.translate(&ex.question, ex.lang, lang)?;
                let (target_answer, answer_lang) = if options.translate_answers {
                    (translator.translate(&ex.answer, ex.lang, lang)?, lang)
                } else {
                    (ex.answer.clone(), en)
                };
                Ok(PromptedExample {
                    prompt: build_prompt(lang, &question),
                    target_answer,
                    lang: answer_lang,
                })
            })();
            match translated {
                Ok(p) => out.examples.push(p),
                Err(e) => {
                    log::warn!("translate-train: example {index} into {lang} skipped: {e}");
                    out.skipped.push(SkippedExample {
                        index,
                        lang,
                        message: e.to_string(),
                    });
                }
            }
        }
    }
    out
}

/// Question to English, English answer, answer back to `lang`. Errors
/// propagate; an empty English answer stays empty.
pub fn translate_test(
    question: &str,
    lang: LanguageCode,
    translator: &dyn Translator,
    english_answerer: impl Fn(&str) -> BackendResult<String>,
) -> BackendResult<String> {
    let en = LanguageCode::En;
    let q_en = translator.translate(question, lang, en)?;
    let a_en = english_answerer(&q_en)?;
    if a_en.trim().is_empty() {
        return Ok(String::new());
    }
    translator.translate(&a_en, en, lang)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{BackendError, Backends, LexiconTranslator};
    use crate::textproc::Lexicons;
    use LanguageCode::*;

    fn src(q: &str, a: &str) -> SourceExample {
        SourceExample {
            question: q.into(),
            answer: a.into(),
            lang: En,
        }
    }

    #[test]
    fn prompt_template_and_parse() {
        assert_eq!(build_prompt(En, "what color?"), "Answer in en: what color?");
        assert_eq!(parse_prompt("Answer in fr: a: b"), Some((Fr, "a: b")));
        assert_eq!(parse_prompt("Answer in xx: q"), None);
    }

    #[test]
    fn english_target_is_identity() {
        let t = LexiconTranslator::bundled(Lexicons::shared());
        let out = translate_train(&[src("what color?", "white")], &[En], &t, TrainOptions::default());
        assert_eq!(
            out.examples,
            [PromptedExample {
                prompt: "Answer in en: what color?".into(),
                target_answer: "white".into(),
                lang: En,
            }]
        );
    }

    #[test]
    fn failures_skip_and_bound_output() {
        let t = LexiconTranslator::bundled(Lexicons::shared());
        let ex = [src("how many dogs?", "two"), src("what color is the cat?", "white")];
        let out = translate_train(
            &ex,
            &LanguageCode::all().collect::<Vec<_>>(),
            &t,
            TrainOptions::default(),
        );
        assert!(out.examples.len() <= 26);
        assert_eq!(out.examples.len() + out.skipped.len(), 26);
        assert!(out.skipped.iter().any(|s| s.lang == Ko));
        let fr = out
            .examples
            .iter()
            .find(|e| e.prompt == "Answer in fr: combien chiens?")
            .unwrap();
        assert_eq!(fr.target_answer, "deux");
    }

    #[test]
    fn cross_lingual_keeps_english_answers() {
        let t = LexiconTranslator::bundled(Lexicons::shared());
        let out = translate_train(
            &[src("how many dogs?", "two")],
            &[Fr],
            &t,
            TrainOptions {
                translate_answers: false,
            },
        );
        assert_eq!(out.examples[0].target_answer, "two");
        assert_eq!(out.examples[0].lang, En);
    }

    #[test]
    fn translate_test_round_trip() {
        let b = Backends::reference();
        let caption = "two dogs on the beach";
        let answer = |q: &str| b.qa.answer_from_context(q, caption);
        assert_eq!(
            translate_test("how many dogs?", En, b.translator.as_ref(), answer).unwrap(),
            "two"
        );
        // fr question -> "how many dogs?" -> "two" -> "deux"
        assert_eq!(
            translate_test("combien chiens ?", Fr, b.translator.as_ref(), answer).unwrap(),
            "deux"
        );
        assert!(matches!(
            translate_test("q", Ko, b.translator.as_ref(), answer),
            Err(BackendError::UnsupportedPair { .. })
        ));
    }
}
