//! Human annotation workflow: question rating, optional rewrite, answer
//! rating, optional correction, standardization, multi-annotator answer
//! expansion and flagging, ending in `done` or `discarded`.
//!
//! [`AnnotationItem::apply`] is the whole transition table. Every
//! (state, event) pair not listed there is rejected with
//! [`AnnotateError::InvalidTransition`] and leaves the item untouched.
//!
//! | state              | event                     | next                              |
//! |--------------------|---------------------------|-----------------------------------|
//! | pending_question   | rate_question(correct)    | pending_answer                    |
//! | pending_question   | rate_question(almost)     | pending_rewrite                   |
//! | pending_question   | rate_question(incorrect)  | discarded                         |
//! | pending_rewrite    | rewrite(non-empty)        | pending_answer                    |
//! | pending_answer     | rate_answer(correct)      | pending_expansion or flag_review  |
//! | pending_answer     | rate_answer(almost/inc.)  | pending_correction                |
//! | pending_correction | correct(non-empty)        | pending_expansion or flag_review  |
//! | pending_expansion  | expand                    | pending_expansion or flag_review  |
//! | flag_review        | flag(set)                 | done or discarded                 |
//!
//! Standardized categories (boolean, numeric, color) go straight to
//! `flag_review`; `other` answers wait for `quorum` distinct expansion
//! submitters.

mod log;
mod queue;
pub mod service;

pub use self::log::{EventLog, EventRecord};
pub use queue::{
    AnnotationQueue, AnnotationStats, Clock, EnqueueSummary, LanguageRatings, Lease, LeasedItem, ManualClock,
    RatingTally, SystemClock, WriteOutcome, DEFAULT_LEASE_TTL_SECS, DEFAULT_QUORUM,
};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::LanguageCode;
use crate::textproc::{is_numeral, normalize, Lexicons};
use crate::types::{AnswerCategory, CandidateQA, Source};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rating {
    Correct,
    AlmostCorrect,
    Incorrect,
}

impl Rating {
    pub const ALL: [Rating; 3] = [Rating::Correct, Rating::AlmostCorrect, Rating::Incorrect];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemState {
    PendingQuestion,
    PendingRewrite,
    PendingAnswer,
    PendingCorrection,
    PendingExpansion,
    FlagReview,
    Done,
    Discarded,
}

impl ItemState {
    pub const ALL: [ItemState; 8] = [
        ItemState::PendingQuestion,
        ItemState::PendingRewrite,
        ItemState::PendingAnswer,
        ItemState::PendingCorrection,
        ItemState::PendingExpansion,
        ItemState::FlagReview,
        ItemState::Done,
        ItemState::Discarded,
    ];

    pub fn is_terminal(self) -> bool {
        matches!(self, ItemState::Done | ItemState::Discarded)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ItemState::PendingQuestion => "pending_question",
            ItemState::PendingRewrite => "pending_rewrite",
            ItemState::PendingAnswer => "pending_answer",
            ItemState::PendingCorrection => "pending_correction",
            ItemState::PendingExpansion => "pending_expansion",
            ItemState::FlagReview => "flag_review",
            ItemState::Done => "done",
            ItemState::Discarded => "discarded",
        }
    }
}

impl fmt::Display for ItemState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Ambiguous,
    RaiSensitive,
    Collection,
}

impl Flag {
    /// Flags that remove the item from the benchmark.
    pub fn discards(self) -> bool {
        matches!(self, Flag::Ambiguous | Flag::RaiSensitive)
    }
}

impl FromStr for Flag {
    type Err = AnnotateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ambiguous" => Ok(Flag::Ambiguous),
            "rai_sensitive" => Ok(Flag::RaiSensitive),
            "collection" => Ok(Flag::Collection),
            other => Err(AnnotateError::Validation(format!("unknown flag `{other}`"))),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnnotateError {
    #[error("item `{0}` not found")]
    NotFound(String),

    #[error("item `{item_id}`: version {given} is stale (current {current})")]
    Conflict { item_id: String, given: u64, current: u64 },

    #[error("item `{item_id}` is leased by `{holder}`")]
    LeaseHeld { item_id: String, holder: String },

    #[error("event `{event}` not accepted in state {state}")]
    InvalidTransition { state: ItemState, event: &'static str },

    #[error("{0}")]
    Validation(String),

    #[error("event log: {0}")]
    Log(String),
}

/// One step of the workflow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    RateQuestion(Rating),
    Rewrite(String),
    RateAnswer(Rating),
    Correct(String),
    Expand { annotator: String, answers: Vec<String> },
    Flag(BTreeSet<Flag>),
}

impl Event {
    pub fn name(&self) -> &'static str {
        match self {
            Event::RateQuestion(_) => "rate_question",
            Event::Rewrite(_) => "rewrite",
            Event::RateAnswer(_) => "rate_answer",
            Event::Correct(_) => "correct",
            Event::Expand { .. } => "expand",
            Event::Flag(_) => "flag",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expansion {
    pub annotator: String,
    pub answers: Vec<String>,
}

/// A candidate moving through the workflow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationItem {
    pub candidate: CandidateQA,
    pub state: ItemState,
    pub question_rating: Option<Rating>,
    pub rewritten_question: Option<String>,
    /// Author of the rewrite; never offered this item's answer step.
    pub rewritten_by: Option<String>,
    pub answer_rating: Option<Rating>,
    pub corrected_answer: Option<String>,
    /// Final primary answer, standardized for standardized categories.
    pub primary_answer: Option<String>,
    pub category: Option<AnswerCategory>,
    /// Primary answer could not be mapped to its category's canonical form.
    pub nonstandard: bool,
    /// One entry per distinct submitter, in submission order.
    pub expansions: Vec<Expansion>,
    pub flags: BTreeSet<Flag>,
    pub version: u64,
}

/// Dependencies of a transition that live outside the item.
#[derive(Clone, Copy)]
pub struct TransitionContext<'a> {
    pub quorum: usize,
    pub lexicons: &'a Lexicons,
    /// Annotator performing the event, when known.
    pub actor: Option<&'a str>,
}

impl AnnotationItem {
    pub fn new(candidate: CandidateQA) -> Self {
        AnnotationItem {
            candidate,
            state: ItemState::PendingQuestion,
            question_rating: None,
            rewritten_question: None,
            rewritten_by: None,
            answer_rating: None,
            corrected_answer: None,
            primary_answer: None,
            category: None,
            nonstandard: false,
            expansions: Vec::new(),
            flags: BTreeSet::new(),
            version: 0,
        }
    }

    pub fn id(&self) -> &str {
        &self.candidate.id
    }

    pub fn lang(&self) -> LanguageCode {
        self.candidate.lang
    }

    pub fn question(&self) -> &str {
        self.rewritten_question.as_deref().unwrap_or(&self.candidate.question)
    }

    pub fn has_submitted(&self, annotator: &str) -> bool {
        self.expansions.iter().any(|e| e.annotator == annotator)
    }

    /// Applies one event. On error the item is unchanged; on success the
    /// version increases by one.
    pub fn apply(&mut self, event: Event, ctx: TransitionContext<'_>) -> Result<ItemState, AnnotateError> {
        use ItemState::*;
        let invalid = AnnotateError::InvalidTransition {
            state: self.state,
            event: event.name(),
        };
        let next = match (self.state, event) {
            (PendingQuestion, Event::RateQuestion(r)) => {
                self.question_rating = Some(r);
                match r {
                    Rating::Correct => PendingAnswer,
                    Rating::AlmostCorrect => PendingRewrite,
                    Rating::Incorrect => Discarded,
                }
            }
            (PendingRewrite, Event::Rewrite(text)) => {
                let text = text.trim();
                if text.is_empty() {
                    return Err(AnnotateError::Validation(
                        "an almost-correct question needs a rewrite".into(),
                    ));
                }
                self.rewritten_question = Some(text.to_string());
                self.rewritten_by = ctx.actor.map(str::to_string);
                PendingAnswer
            }
            (PendingAnswer, Event::RateAnswer(r)) => {
                if r == Rating::Incorrect && self.candidate.source == Source::Directqg {
                    return Err(AnnotateError::Validation(
                        "directqg answers are accepted as correct or almost correct only".into(),
                    ));
                }
                self.answer_rating = Some(r);
                if r == Rating::Correct {
                    self.finish_answer(self.candidate.answer.clone(), ctx.lexicons)
                } else {
                    PendingCorrection
                }
            }
            (PendingCorrection, Event::Correct(text)) => {
                let text = text.trim();
                if text.is_empty() {
                    return Err(AnnotateError::Validation("a corrected answer is required".into()));
                }
                self.corrected_answer = Some(text.to_string());
                self.finish_answer(text.to_string(), ctx.lexicons)
            }
            (PendingExpansion, Event::Expand { annotator, answers }) => {
                if annotator.trim().is_empty() {
                    return Err(AnnotateError::Validation("annotator id is empty".into()));
                }
                if self.has_submitted(&annotator) {
                    return Err(AnnotateError::Validation(format!(
                        "annotator `{annotator}` already submitted expansions"
                    )));
                }
                let lang = self.lang();
                let category = self.category.unwrap_or(AnswerCategory::Other);
                let mut cleaned: Vec<String> = Vec::new();
                for a in &answers {
                    let n = normalize(a, lang);
                    let s = standardize_answer(&n, category, lang, ctx.lexicons).value;
                    if !s.is_empty() && !cleaned.contains(&s) {
                        cleaned.push(s);
                    }
                }
                self.expansions.push(Expansion {
                    annotator,
                    answers: cleaned,
                });
                if self.expansions.len() >= ctx.quorum {
                    FlagReview
                } else {
                    PendingExpansion
                }
            }
            (FlagReview, Event::Flag(flags)) => {
                let discard = flags.iter().any(|f| f.discards());
                self.flags = flags;
                if discard {
                    Discarded
                } else {
                    Done
                }
            }
            _ => return Err(invalid),
        };
        self.state = next;
        self.version += 1;
        Ok(next)
    }

    fn finish_answer(&mut self, answer: String, lexicons: &Lexicons) -> ItemState {
        let lang = self.lang();
        let category = lexicons.answer_category(&answer, lang);
        let std = standardize_answer(&answer, category, lang, lexicons);
        self.category = Some(category);
        self.nonstandard = std.nonstandard;
        self.primary_answer = Some(std.value);
        if category.is_standardized() {
            ItemState::FlagReview
        } else {
            ItemState::PendingExpansion
        }
    }
}

/// Result of [`standardize_answer`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Standardized {
    pub value: String,
    /// No canonical form was found; `value` is the input unchanged.
    pub nonstandard: bool,
}

/// Maps boolean, numeric and color answers to their canonical lexicon form:
/// canonical yes/no, decimal digits, color lemma. `other` answers and
/// unmappable values come back unchanged, the latter marked nonstandard.
pub fn standardize_answer(
    answer: &str,
    category: AnswerCategory,
    lang: LanguageCode,
    lexicons: &Lexicons,
) -> Standardized {
    let norm = normalize(answer, lang);
    let lex = lexicons.lang(lang);
    let mapped = match category {
        AnswerCategory::Other => {
            return Standardized {
                value: answer.to_string(),
                nonstandard: false,
            }
        }
        AnswerCategory::Boolean => lex
            .polarity(&norm)
            .and_then(|p| lex.canonical_boolean(p))
            .map(str::to_string),
        AnswerCategory::Numeric => {
            if is_numeral(&norm) {
                Some(norm.clone())
            } else {
                lex.number_value(&norm).map(|v| v.to_string())
            }
        }
        AnswerCategory::Color => lex.canonical_color(&norm).map(str::to_string),
    };
    match mapped {
        Some(value) => Standardized {
            value,
            nonstandard: false,
        },
        None => Standardized {
            value: answer.to_string(),
            nonstandard: true,
        },
    }
}
