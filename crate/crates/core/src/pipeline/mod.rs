//! Translation-based question-answer generation over a caption corpus.
//!
//! Per caption: caption → English (step 1), English QG (step 2), QG-QA
//! consistency filter, translation into the target language (step 3) and the
//! caption-answer filter (step 4). DirectQG candidates are generated
//! alongside and skip step 4.
//!
//! Every generated candidate ends in exactly one of `passed` / `rejected`,
//! and a rejected candidate's trace ends with its single rejecting filter.

mod stats;

pub use stats::{
    format_tenths, percent_tenths, render_stage_table, StageRecord, StageStats, TableFormat, STAGE_CAPTIONS,
    STAGE_DIRECTQG, STAGE_ENGLISH, STAGE_VALIDATED_ENGLISH, STAGE_VALIDATED_MULTILINGUAL,
};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backends::{direct_answer_kind, Backends, DirectQgRequest, QuestionAnswerer, Translator};
use crate::error::{CoreError, Result};
use crate::lang::LanguageCode;
use crate::textproc::{normalize, Lexicons, Polarity};
use crate::types::{AnswerCategory, CandidateQA, Caption, Source, Verdict};

pub const FILTER_QGQA: &str = "qgqa_consistency";
pub const FILTER_TRANSLATION: &str = "qa_translation";
pub const FILTER_CAPTION_ANSWER: &str = "caption_answer";
pub const DETAIL_BACKEND_ERROR: &str = "backend_error";

/// How the QG-QA filter compares the re-derived answer with the generated one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchRule {
    #[default]
    NormalizedExact,
    TokenF1Threshold(f64),
}

impl fmt::Display for MatchRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchRule::NormalizedExact => f.write_str("normalized_exact"),
            MatchRule::TokenF1Threshold(t) => write!(f, "token_f1:{t}"),
        }
    }
}

impl FromStr for MatchRule {
    type Err = CoreError;

    /// `normalized_exact` or `token_f1:<τ>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "normalized_exact" {
            return Ok(MatchRule::NormalizedExact);
        }
        let tau = s
            .strip_prefix("token_f1:")
            .and_then(|t| t.parse::<f64>().ok())
            .ok_or_else(|| {
                CoreError::Invalid(format!("match rule `{s}`: expected normalized_exact or token_f1:<t>"))
            })?;
        let rule = MatchRule::TokenF1Threshold(tau);
        rule.validate()?;
        Ok(rule)
    }
}

impl MatchRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MatchRule::TokenF1Threshold(t) if !(t > 0.0 && t <= 1.0) => {
                Err(CoreError::Invalid(format!("token F1 threshold {t} outside (0, 1]")))
            }
            _ => Ok(()),
        }
    }

    pub fn accepts(&self, predicted: &str, expected: &str, lexicons: &Lexicons) -> bool {
        let en = LanguageCode::En;
        match *self {
            MatchRule::NormalizedExact => {
                let p = normalize(predicted, en);
                !p.is_empty() && p == normalize(expected, en)
            }
            MatchRule::TokenF1Threshold(t) => {
                !predicted.trim().is_empty() && lexicons.token_f1(predicted, expected, en) >= t
            }
        }
    }
}

#[derive(Clone)]
pub struct PipelineConfig {
    pub target_lang: LanguageCode,
    pub backends: Backends,
    pub qgqa_match_rule: MatchRule,
    /// Target answers for DirectQG in `target_lang`; empty disables it.
    pub directqg_answers: Vec<String>,
    pub parallelism: usize,
}

impl fmt::Debug for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PipelineConfig")
            .field("target_lang", &self.target_lang)
            .field("backends", &self.backends)
            .field("qgqa_match_rule", &self.qgqa_match_rule)
            .field("directqg_answers", &self.directqg_answers)
            .field("parallelism", &self.parallelism)
            .finish()
    }
}

impl PipelineConfig {
    pub fn new(target_lang: LanguageCode, backends: Backends) -> Self {
        PipelineConfig {
            target_lang,
            backends,
            qgqa_match_rule: MatchRule::default(),
            directqg_answers: Vec::new(),
            parallelism: 1,
        }
    }

    /// Enables DirectQG with the canonical yes, no and none forms of the
    /// target language.
    pub fn with_default_directqg(mut self) -> Self {
        let lex = self.backends.lexicons().lang(self.target_lang);
        self.directqg_answers = [
            lex.canonical_boolean(Polarity::Yes),
            lex.canonical_boolean(Polarity::No),
            lex.canonical_none(),
        ]
        .into_iter()
        .flatten()
        .map(String::from)
        .collect();
        self
    }

    pub fn lexicons(&self) -> &Arc<Lexicons> {
        self.backends.lexicons()
    }

    pub fn validate(&self) -> Result<()> {
        self.qgqa_match_rule.validate()?;
        if self.parallelism == 0 {
            return Err(CoreError::Invalid("parallelism must be positive".into()));
        }
        for a in &self.directqg_answers {
            direct_answer_kind(a, self.target_lang, self.lexicons()).map_err(|e| CoreError::Invalid(e.to_string()))?;
        }
        Ok(())
    }

    pub fn snapshot(&self) -> ConfigSnapshot {
        ConfigSnapshot {
            target_lang: self.target_lang,
            translator: self.backends.translator.capability().name,
            qg: self.backends.qg.capability().name,
            qa: self.backends.qa.capability().name,
            directqg: self.backends.directqg.capability().name,
            qgqa_match_rule: self.qgqa_match_rule.to_string(),
            directqg_answers: self.directqg_answers.clone(),
        }
    }
}

/// Serializable record of the settings a run used. Parallelism is left out
/// because it never changes the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub target_lang: LanguageCode,
    pub translator: String,
    pub qg: String,
    pub qa: String,
    pub directqg: String,
    pub qgqa_match_rule: String,
    pub directqg_answers: Vec<String>,
}

/// A caption that could not be processed at some stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionFailure {
    pub caption_index: usize,
    pub image_id: String,
    pub stage: String,
    pub message: String,
}

pub const STAGE_CAPTION_TRANSLATION: &str = "caption_translation";
pub const STAGE_QUESTION_GENERATION: &str = "question_generation";
pub const STAGE_QA_TRANSLATION: &str = "qa_translation";
pub const STAGE_DIRECT_GENERATION: &str = "direct_generation";

fn failure(index: usize, caption: &Caption, stage: &str, message: impl fmt::Display) -> CaptionFailure {
    let f = CaptionFailure {
        caption_index: index,
        image_id: caption.image_id.clone(),
        stage: stage.to_string(),
        message: message.to_string(),
    };
    log::warn!("caption {} ({}): {} failed: {}", index, f.image_id, stage, f.message);
    f
}

/// Step 1: the caption's English text. Uses `english_text` when present.
fn english_caption(caption: &Caption, translator: &dyn Translator) -> std::result::Result<String, String> {
    if let Some(t) = &caption.english_text {
        return Ok(t.clone());
    }
    translator
        .translate(&caption.text, caption.lang, LanguageCode::En)
        .map_err(|e| format!("{}->en: {e}", caption.lang))
}

/// Steps 1 and 2. Candidates carry the English pair as their current
/// question and answer.
fn english_candidates(
    caption: &Caption,
    config: &PipelineConfig,
) -> std::result::Result<Vec<CandidateQA>, (String, String)> {
    let c_e = english_caption(caption, config.backends.translator.as_ref())
        .map_err(|m| (STAGE_CAPTION_TRANSLATION.to_string(), m))?;
    let qg = config
        .backends
        .qg
        .generate_qa(&c_e)
        .map_err(|e| (STAGE_QUESTION_GENERATION.to_string(), e.to_string()))?;
    Ok(qg
        .pairs
        .into_iter()
        .map(|(q, a)| CandidateQA {
            id: CandidateQA::content_id(&caption.image_id, config.target_lang, Source::Transvq2a, &q, &a),
            image_id: caption.image_id.clone(),
            lang: config.target_lang,
            question: q.clone(),
            answer: a.clone(),
            english_question: q,
            english_answer: a,
            source: Source::Transvq2a,
            filter_trace: Vec::new(),
            caption: Some(caption.text.clone()),
            caption_lang: Some(caption.lang),
            english_caption: Some(c_e.clone()),
        })
        .collect())
}

/// Step 3 for one candidate.
fn translate_pair(c: &mut CandidateQA, translator: &dyn Translator) -> crate::backends::BackendResult<()> {
    let en = LanguageCode::En;
    c.question = translator.translate(&c.english_question, en, c.lang)?;
    c.answer = translator.translate(&c.english_answer, en, c.lang)?;
    Ok(())
}

/// Steps 1 to 3 without any filtering.
pub fn transvq2a(caption: &Caption, config: &PipelineConfig) -> std::result::Result<Vec<CandidateQA>, CaptionFailure> {
    let mut cands = english_candidates(caption, config).map_err(|(s, m)| failure(0, caption, &s, m))?;
    for c in &mut cands {
        translate_pair(c, config.backends.translator.as_ref())
            .map_err(|e| failure(0, caption, STAGE_QA_TRANSLATION, e))?;
    }
    Ok(cands)
}

fn record(c: &mut CandidateQA, filter: &str, verdict: Verdict, detail: impl Into<String>) {
    c.record(filter, verdict, detail)
        .expect("filters only see unrejected candidates");
}

fn split(cands: Vec<CandidateQA>) -> (Vec<CandidateQA>, Vec<CandidateQA>) {
    cands.into_iter().partition(|c| !c.is_rejected())
}

/// Re-answers each English question from the English caption and keeps the
/// candidates whose answer is reproduced under `rule`.
pub fn qgqa_consistency_filter(
    candidates: Vec<CandidateQA>,
    qa: &dyn QuestionAnswerer,
    rule: MatchRule,
    lexicons: &Lexicons,
) -> (Vec<CandidateQA>, Vec<CandidateQA>) {
    let judged = candidates
        .into_iter()
        .map(|mut c| {
            let Some(context) = c.english_caption.clone() else {
                record(&mut c, FILTER_QGQA, Verdict::Reject, "missing_english_caption");
                return c;
            };
            match qa.answer_from_context(&c.english_question, &context) {
                Ok(pred) => {
                    let verdict = if rule.accepts(&pred, &c.english_answer, lexicons) {
                        Verdict::Pass
                    } else {
                        Verdict::Reject
                    };
                    record(&mut c, FILTER_QGQA, verdict, format!("predicted={pred}"));
                }
                Err(e) => {
                    log::warn!("candidate {}: QA backend failed: {e}", c.id);
                    record(&mut c, FILTER_QGQA, Verdict::Reject, DETAIL_BACKEND_ERROR);
                }
            }
            c
        })
        .collect();
    split(judged)
}

/// Keeps a candidate when its answer occurs in the original caption,
/// back-translating the answer first when languages differ. Boolean answers
/// pass untested.
pub fn caption_answer_filter(
    candidates: Vec<CandidateQA>,
    original_caption: &Caption,
    translator: &dyn Translator,
    lexicons: &Lexicons,
) -> (Vec<CandidateQA>, Vec<CandidateQA>) {
    let judged = candidates
        .into_iter()
        .map(|mut c| {
            if lexicons.answer_category(&c.answer, c.lang) == AnswerCategory::Boolean {
                record(&mut c, FILTER_CAPTION_ANSWER, Verdict::Pass, "boolean_bypass");
                return c;
            }
            let probe = if c.lang == original_caption.lang {
                Ok(c.answer.clone())
            } else {
                translator.translate(&c.answer, c.lang, original_caption.lang)
            };
            match probe {
                Ok(a) => {
                    let found = lexicons.answer_in_caption(&a, &original_caption.text, original_caption.lang);
                    let verdict = if found { Verdict::Pass } else { Verdict::Reject };
                    record(&mut c, FILTER_CAPTION_ANSWER, verdict, format!("probe={a}"));
                }
                Err(e) => {
                    log::warn!("candidate {}: back-translation failed: {e}", c.id);
                    record(&mut c, FILTER_CAPTION_ANSWER, Verdict::Reject, DETAIL_BACKEND_ERROR);
                }
            }
            c
        })
        .collect();
    split(judged)
}

fn directqg_for_caption(
    index: usize,
    caption: &Caption,
    config: &PipelineConfig,
) -> std::result::Result<Vec<CandidateQA>, CaptionFailure> {
    let lang = config.target_lang;
    let text = config
        .backends
        .translator
        .translate(&caption.text, caption.lang, lang)
        .map_err(|e| failure(index, caption, STAGE_CAPTION_TRANSLATION, e))?;
    let mut out = Vec::new();
    for target in &config.directqg_answers {
        let answer = canonical_direct_answer(target, lang, config.lexicons());
        let req = DirectQgRequest::new(text.clone(), answer.clone(), lang);
        let questions = config
            .backends
            .directqg
            .direct_generate(&req)
            .map_err(|e| failure(index, caption, STAGE_DIRECT_GENERATION, e))?;
        for q in questions {
            if q.trim().is_empty() {
                continue;
            }
            let mut c = CandidateQA {
                id: CandidateQA::content_id(&caption.image_id, lang, Source::Directqg, &q, &answer),
                image_id: caption.image_id.clone(),
                lang,
                english_question: String::new(),
                english_answer: String::new(),
                question: q,
                answer: answer.clone(),
                source: Source::Directqg,
                filter_trace: Vec::new(),
                caption: Some(caption.text.clone()),
                caption_lang: Some(caption.lang),
                english_caption: None,
            };
            record(&mut c, FILTER_CAPTION_ANSWER, Verdict::Pass, "directqg_bypass");
            if !out.iter().any(|o: &CandidateQA| o.id == c.id) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

fn canonical_direct_answer(target: &str, lang: LanguageCode, lexicons: &Lexicons) -> String {
    use crate::backends::DirectAnswerKind;
    let lex = lexicons.lang(lang);
    let canonical = match direct_answer_kind(target, lang, lexicons) {
        Ok(DirectAnswerKind::Yes) => lex.canonical_boolean(Polarity::Yes),
        Ok(DirectAnswerKind::No) => lex.canonical_boolean(Polarity::No),
        Ok(DirectAnswerKind::None) => lex.canonical_none(),
        Err(_) => None,
    };
    canonical.map(String::from).unwrap_or_else(|| normalize(target, lang))
}

fn pool(parallelism: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .expect("thread pool")
}

/// DirectQG candidates for every caption, sorted by id. Failing captions are
/// skipped and reported.
pub fn run_directqg(captions: &[Caption], config: &PipelineConfig) -> Result<(Vec<CandidateQA>, Vec<CaptionFailure>)> {
    config.validate()?;
    let per_caption: Vec<_> = pool(config.parallelism).install(|| {
        captions
            .par_iter()
            .enumerate()
            .map(|(i, c)| directqg_for_caption(i, c, config))
            .collect()
    });
    let mut out = Vec::new();
    let mut failures = Vec::new();
    for r in per_caption {
        match r {
            Ok(c) => out.extend(c),
            Err(f) => failures.push(f),
        }
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok((out, failures))
}

#[derive(Debug, Default)]
struct CaptionOutcome {
    english: usize,
    validated_english: usize,
    passed: Vec<CandidateQA>,
    rejected: Vec<CandidateQA>,
    failure: Option<CaptionFailure>,
}

fn process_caption(index: usize, caption: &Caption, config: &PipelineConfig) -> CaptionOutcome {
    let translator = config.backends.translator.as_ref();
    let lexicons = config.lexicons().as_ref();
    let cands = match english_candidates(caption, config) {
        Ok(c) => c,
        Err((stage, m)) => {
            return CaptionOutcome {
                failure: Some(failure(index, caption, &stage, m)),
                ..Default::default()
            }
        }
    };
    let english = cands.len();
    let (valid, mut rejected) =
        qgqa_consistency_filter(cands, config.backends.qa.as_ref(), config.qgqa_match_rule, lexicons);
    let validated_english = valid.len();
    let mut translated = Vec::with_capacity(valid.len());
    for mut c in valid {
        match translate_pair(&mut c, translator) {
            Ok(()) => translated.push(c),
            Err(e) => {
                log::warn!("candidate {}: translation into {} failed: {e}", c.id, c.lang);
                record(&mut c, FILTER_TRANSLATION, Verdict::Reject, DETAIL_BACKEND_ERROR);
                rejected.push(c);
            }
        }
    }
    let (passed, rej) = caption_answer_filter(translated, caption, translator, lexicons);
    rejected.extend(rej);
    CaptionOutcome {
        english,
        validated_english,
        passed,
        rejected,
        failure: None,
    }
}

/// Counts behind a run report.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunCounts {
    pub generated: usize,
    pub passed: usize,
    pub rejected: usize,
    pub rejected_by_filter: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRun {
    pub config: ConfigSnapshot,
    pub passed: Vec<CandidateQA>,
    pub rejected: Vec<CandidateQA>,
    pub stats: StageStats,
    pub failures: Vec<CaptionFailure>,
}

/// The `run_report.json` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ConfigSnapshot,
    pub stats: StageStats,
    pub counts: RunCounts,
    pub failures: Vec<CaptionFailure>,
}

impl GenerationRun {
    pub fn counts(&self) -> RunCounts {
        let mut by_filter = BTreeMap::new();
        for c in &self.rejected {
            let f = c.rejection().map_or("unknown", |r| r.filter.as_str());
            *by_filter.entry(f.to_string()).or_insert(0) += 1;
        }
        RunCounts {
            generated: self.passed.len() + self.rejected.len(),
            passed: self.passed.len(),
            rejected: self.rejected.len(),
            rejected_by_filter: by_filter,
        }
    }

    pub fn report(&self) -> RunReport {
        RunReport {
            config: self.config.clone(),
            stats: self.stats.clone(),
            counts: self.counts(),
            failures: self.failures.clone(),
        }
    }
}

/// The full pipeline over a corpus. Output ordering is by candidate id
/// (caption order breaks ties), so it does not depend on parallelism.
pub fn run_corpus(captions: &[Caption], config: &PipelineConfig) -> Result<GenerationRun> {
    config.validate()?;
    let outcomes: Vec<CaptionOutcome> = pool(config.parallelism).install(|| {
        captions
            .par_iter()
            .enumerate()
            .map(|(i, c)| process_caption(i, c, config))
            .collect()
    });
    let mut passed = Vec::new();
    let mut rejected = Vec::new();
    let mut failures = Vec::new();
    let (mut english, mut validated_english) = (0, 0);
    for o in outcomes {
        english += o.english;
        validated_english += o.validated_english;
        passed.extend(o.passed);
        rejected.extend(o.rejected);
        failures.extend(o.failure);
    }
    let multilingual = passed.len();
    let mut stages = vec![
        StageRecord::source(STAGE_CAPTIONS, captions.len()),
        StageRecord::source(STAGE_ENGLISH, english),
        StageRecord::filter(STAGE_VALIDATED_ENGLISH, english, validated_english),
        StageRecord::filter(STAGE_VALIDATED_MULTILINGUAL, validated_english, multilingual),
    ];
    if !config.directqg_answers.is_empty() {
        let (direct, direct_failures) = run_directqg(captions, config)?;
        stages.push(StageRecord::source(STAGE_DIRECTQG, direct.len()));
        passed.extend(direct);
        failures.extend(direct_failures);
    }
    passed.sort_by(|a, b| a.id.cmp(&b.id));
    rejected.sort_by(|a, b| a.id.cmp(&b.id));
    failures.sort_by(|a, b| (a.caption_index, &a.stage).cmp(&(b.caption_index, &b.stage)));
    Ok(GenerationRun {
        config: config.snapshot(),
        passed,
        rejected,
        stats: StageStats {
            lang: config.target_lang,
            stages,
        },
        failures,
    })
}
