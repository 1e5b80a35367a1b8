//! The annotation queue: items in enqueue order, per-item leases, optimistic
//! versions, and the event log every accepted write goes through.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::log::{EventLog, EventRecord};
use super::{AnnotateError, AnnotationItem, Event, Flag, ItemState, Rating, TransitionContext};
use crate::lang::LanguageCode;
use crate::pipeline::{format_tenths, percent_tenths};
use crate::textproc::{normalize, Lexicons, Polarity};
use crate::types::{Benchmark, BenchmarkExample, CandidateQA, Source};

pub const DEFAULT_QUORUM: usize = 2;
pub const DEFAULT_LEASE_TTL_SECS: i64 = 30 * 60;

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// A clock that only moves when told to.
#[derive(Debug)]
pub struct ManualClock(Mutex<DateTime<Utc>>);

impl ManualClock {
    pub fn new(start: DateTime<Utc>) -> Self {
        ManualClock(Mutex::new(start))
    }

    pub fn advance(&self, by: Duration) {
        *self.0.lock().unwrap() += by;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> DateTime<Utc> {
        *self.0.lock().unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lease {
    pub item_id: String,
    pub annotator: String,
    pub expires_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeasedItem {
    pub lease: Lease,
    pub item: AnnotationItem,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WriteOutcome {
    pub item_id: String,
    pub state: ItemState,
    pub version: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EnqueueSummary {
    pub added: usize,
    /// Ids already in the queue; enqueue is idempotent on id.
    pub duplicates: usize,
    pub skipped_rejected: usize,
    /// DirectQG candidates whose answer is not "no".
    pub skipped_directqg: usize,
}

/// Logged form of each accepted write; replay re-applies these.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "event", content = "payload", rename_all = "snake_case")]
enum Op {
    Enqueue {
        candidate: CandidateQA,
    },
    QuestionRating {
        version: u64,
        annotator: Option<String>,
        rating: Rating,
        rewrite: Option<String>,
    },
    AnswerRating {
        version: u64,
        annotator: Option<String>,
        rating: Rating,
        correction: Option<String>,
    },
    Expansion {
        version: u64,
        annotator: String,
        answers: Vec<String>,
        quorum: usize,
    },
    Flags {
        version: u64,
        annotator: Option<String>,
        flags: BTreeSet<Flag>,
    },
}

impl Op {
    fn version(&self) -> Option<u64> {
        match self {
            Op::Enqueue { .. } => None,
            Op::QuestionRating { version, .. }
            | Op::AnswerRating { version, .. }
            | Op::Expansion { version, .. }
            | Op::Flags { version, .. } => Some(*version),
        }
    }

    fn actor(&self) -> Option<&str> {
        match self {
            Op::Enqueue { .. } => None,
            Op::Expansion { annotator, .. } => Some(annotator),
            Op::QuestionRating { annotator, .. } | Op::AnswerRating { annotator, .. } | Op::Flags { annotator, .. } => {
                annotator.as_deref()
            }
        }
    }

    fn quorum(&self) -> Option<usize> {
        match self {
            Op::Expansion { quorum, .. } => Some(*quorum),
            _ => None,
        }
    }

    /// The workflow events one write stands for, applied atomically.
    fn events(self) -> Result<Vec<Event>, AnnotateError> {
        let stray = |field: &str, text: &Option<String>, rating: Rating| -> Result<(), AnnotateError> {
            match text {
                Some(t) if !t.trim().is_empty() => Err(AnnotateError::Validation(format!(
                    "{field} given with rating {}",
                    serde_json::to_value(rating).unwrap().as_str().unwrap_or_default()
                ))),
                _ => Ok(()),
            }
        };
        Ok(match self {
            Op::Enqueue { .. } => Vec::new(),
            Op::QuestionRating { rating, rewrite, .. } => {
                if rating == Rating::AlmostCorrect {
                    vec![Event::RateQuestion(rating), Event::Rewrite(rewrite.unwrap_or_default())]
                } else {
                    stray("rewrite", &rewrite, rating)?;
                    vec![Event::RateQuestion(rating)]
                }
            }
            Op::AnswerRating { rating, correction, .. } => {
                if rating == Rating::Correct {
                    stray("correction", &correction, rating)?;
                    vec![Event::RateAnswer(rating)]
                } else {
                    vec![
                        Event::RateAnswer(rating),
                        Event::Correct(correction.unwrap_or_default()),
                    ]
                }
            }
            Op::Expansion { annotator, answers, .. } => vec![Event::Expand { annotator, answers }],
            Op::Flags { flags, .. } => vec![Event::Flag(flags)],
        })
    }

    fn into_record(self, seq: u64, time: DateTime<Utc>, item_id: &str) -> EventRecord {
        let Value::Object(mut obj) = serde_json::to_value(self).expect("ops serialize") else {
            unreachable!("adjacently tagged enum serializes to an object")
        };
        EventRecord {
            seq,
            time,
            item_id: item_id.to_string(),
            event: obj
                .remove("event")
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            payload: obj.remove("payload").unwrap_or(Value::Null),
        }
    }

    fn from_record(rec: &EventRecord) -> Result<Op, AnnotateError> {
        serde_json::from_value(json!({"event": rec.event, "payload": rec.payload}))
            .map_err(|e| AnnotateError::Log(format!("seq {}: {e}", rec.seq)))
    }
}

/// Per-language tally of one rating block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RatingTally {
    pub evaluated: usize,
    pub correct: usize,
    pub almost_correct: usize,
    pub incorrect: usize,
}

impl RatingTally {
    fn add(&mut self, r: Rating) {
        self.evaluated += 1;
        match r {
            Rating::Correct => self.correct += 1,
            Rating::AlmostCorrect => self.almost_correct += 1,
            Rating::Incorrect => self.incorrect += 1,
        }
    }

    pub fn count(&self, r: Rating) -> usize {
        match r {
            Rating::Correct => self.correct,
            Rating::AlmostCorrect => self.almost_correct,
            Rating::Incorrect => self.incorrect,
        }
    }

    /// Share of `r` in tenths of a percent; `None` when nothing was rated.
    pub fn pct_tenths(&self, r: Rating) -> Option<u64> {
        percent_tenths(self.count(r), self.evaluated)
    }

    /// `"60.0%"`, or `"-"` for an empty tally.
    pub fn pct_cell(&self, r: Rating) -> String {
        self.pct_tenths(r)
            .map_or_else(|| "-".to_string(), |t| format!("{}%", format_tenths(t)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LanguageRatings {
    pub lang: LanguageCode,
    pub questions: RatingTally,
    /// Only items whose question survived.
    pub answers: RatingTally,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AnnotationStats {
    pub items: usize,
    pub by_state: BTreeMap<ItemState, usize>,
    pub languages: Vec<LanguageRatings>,
}

impl AnnotationStats {
    /// Two blocks, questions then answers, one column per language.
    pub fn render_text(&self) -> String {
        const LABELS: [(Rating, &str); 3] = [
            (Rating::Correct, "% Correct"),
            (Rating::AlmostCorrect, "% Almost Correct"),
            (Rating::Incorrect, "% Incorrect"),
        ];
        let mut rows: Vec<Vec<String>> = Vec::new();
        let mut header = vec![String::new()];
        header.extend(self.languages.iter().map(|l| l.lang.to_string()));
        rows.push(header);
        for (title, pick) in [
            (
                "# of questions evaluated",
                (|l: &LanguageRatings| l.questions) as fn(&LanguageRatings) -> RatingTally,
            ),
            ("# of answers evaluated", |l: &LanguageRatings| l.answers),
        ] {
            let mut row = vec![title.to_string()];
            row.extend(self.languages.iter().map(|l| pick(l).evaluated.to_string()));
            rows.push(row);
            for (r, label) in LABELS {
                let mut row = vec![label.to_string()];
                row.extend(self.languages.iter().map(|l| pick(l).pct_cell(r)));
                rows.push(row);
            }
        }
        let ncols = rows[0].len();
        let widths: Vec<usize> = (0..ncols)
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows {
            let mut line = String::new();
            for (c, cell) in row.iter().enumerate() {
                if c == 0 {
                    let _ = write!(line, "{cell:<w$}", w = widths[0]);
                } else {
                    let _ = write!(line, "  {cell:>w$}", w = widths[c]);
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

pub struct AnnotationQueue {
    items: Vec<AnnotationItem>,
    index: HashMap<String, usize>,
    /// At most one lease per item, keyed by item id.
    leases: HashMap<String, Lease>,
    quorum: usize,
    lease_ttl: Duration,
    clock: Arc<dyn Clock>,
    lexicons: Arc<Lexicons>,
    log: Option<EventLog>,
    seq: u64,
}

impl std::fmt::Debug for AnnotationQueue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnnotationQueue")
            .field("items", &self.items.len())
            .field("leases", &self.leases.len())
            .field("quorum", &self.quorum)
            .field("seq", &self.seq)
            .finish()
    }
}

impl Default for AnnotationQueue {
    fn default() -> Self {
        AnnotationQueue::new()
    }
}

impl AnnotationQueue {
    /// An in-memory queue with quorum 2 and 30-minute leases.
    pub fn new() -> Self {
        AnnotationQueue {
            items: Vec::new(),
            index: HashMap::new(),
            leases: HashMap::new(),
            quorum: DEFAULT_QUORUM,
            lease_ttl: Duration::seconds(DEFAULT_LEASE_TTL_SECS),
            clock: Arc::new(SystemClock),
            lexicons: Lexicons::shared(),
            log: None,
            seq: 0,
        }
    }

    /// Opens the event log at `path`, replays it, and appends every later
    /// write to it.
    pub fn open(path: &Path) -> Result<Self, AnnotateError> {
        AnnotationQueue::new().with_log(path)
    }

    /// Panics if `quorum` is zero.
    pub fn with_quorum(mut self, quorum: usize) -> Self {
        assert!(quorum > 0, "expansion quorum must be positive");
        self.quorum = quorum;
        self
    }

    pub fn with_lease_ttl(mut self, ttl: Duration) -> Self {
        self.lease_ttl = ttl;
        self
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_lexicons(mut self, lexicons: Arc<Lexicons>) -> Self {
        self.lexicons = lexicons;
        self
    }

    /// Replays the log at `path` into this (empty) queue and attaches it.
    pub fn with_log(mut self, path: &Path) -> Result<Self, AnnotateError> {
        assert!(
            self.items.is_empty() && self.log.is_none(),
            "log attached to a non-empty queue"
        );
        let (log, records) = EventLog::open(path)?;
        for rec in &records {
            let op = Op::from_record(rec)?;
            self.replay(rec, op)
                .map_err(|e| AnnotateError::Log(format!("{}: seq {}: {e}", path.display(), rec.seq)))?;
            self.seq = rec.seq;
        }
        self.log = Some(log);
        Ok(self)
    }

    fn replay(&mut self, rec: &EventRecord, op: Op) -> Result<(), AnnotateError> {
        match op {
            Op::Enqueue { candidate } => {
                if self.index.contains_key(&candidate.id) {
                    return Err(AnnotateError::Validation(format!(
                        "duplicate enqueue of `{}`",
                        candidate.id
                    )));
                }
                self.push(candidate);
                Ok(())
            }
            op => {
                let idx = self.position(&rec.item_id)?;
                let updated = self.prepare(idx, op)?;
                self.items[idx] = updated;
                Ok(())
            }
        }
    }

    pub fn quorum(&self) -> usize {
        self.quorum
    }

    pub fn lease_ttl(&self) -> Duration {
        self.lease_ttl
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[AnnotationItem] {
        &self.items
    }

    pub fn get(&self, id: &str) -> Option<&AnnotationItem> {
        self.index.get(id).map(|&i| &self.items[i])
    }

    pub fn event_count(&self) -> u64 {
        self.seq
    }

    /// Flushes the event log to stable storage.
    pub fn sync(&mut self) -> Result<(), AnnotateError> {
        match &mut self.log {
            Some(log) => log.sync(),
            None => Ok(()),
        }
    }

    fn push(&mut self, candidate: CandidateQA) {
        self.index.insert(candidate.id.clone(), self.items.len());
        self.items.push(AnnotationItem::new(candidate));
    }

    fn position(&self, id: &str) -> Result<usize, AnnotateError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| AnnotateError::NotFound(id.to_string()))
    }

    fn log_op(&mut self, item_id: &str, op: Op) -> Result<(), AnnotateError> {
        let seq = self.seq + 1;
        if let Some(log) = &mut self.log {
            log.append(&op.into_record(seq, self.clock.now(), item_id))?;
        }
        self.seq = seq;
        Ok(())
    }

    /// Adds passed candidates. DirectQG candidates enter only when their
    /// answer is "no"; rejected candidates and known ids are skipped.
    pub fn enqueue(
        &mut self,
        candidates: impl IntoIterator<Item = CandidateQA>,
    ) -> Result<EnqueueSummary, AnnotateError> {
        let mut summary = EnqueueSummary::default();
        for c in candidates {
            if c.is_rejected() {
                summary.skipped_rejected += 1;
                continue;
            }
            if c.source == Source::Directqg
                && self.lexicons.lang(c.lang).polarity(&normalize(&c.answer, c.lang)) != Some(Polarity::No)
            {
                summary.skipped_directqg += 1;
                continue;
            }
            if self.index.contains_key(&c.id) {
                summary.duplicates += 1;
                continue;
            }
            let id = c.id.clone();
            self.log_op(&id, Op::Enqueue { candidate: c.clone() })?;
            self.push(c);
            summary.added += 1;
        }
        Ok(summary)
    }

    fn active_lease(&self, item_id: &str, now: DateTime<Utc>) -> Option<&Lease> {
        self.leases.get(item_id).filter(|l| l.expires_at > now)
    }

    fn eligible(item: &AnnotationItem, annotator: &str) -> bool {
        match item.state {
            ItemState::PendingAnswer | ItemState::PendingCorrection => item.rewritten_by.as_deref() != Some(annotator),
            ItemState::PendingExpansion => !item.has_submitted(annotator),
            s => !s.is_terminal(),
        }
    }

    /// Leases the oldest unleased item in `lang` this annotator may work
    /// on. An annotator already holding a live lease in `lang` gets that
    /// item back. `None` when nothing is available.
    pub fn next_item(&mut self, annotator: &str, lang: LanguageCode) -> Result<Option<LeasedItem>, AnnotateError> {
        if annotator.trim().is_empty() {
            return Err(AnnotateError::Validation("annotator id is empty".into()));
        }
        let now = self.clock.now();
        self.leases.retain(|_, l| l.expires_at > now);
        let held = self
            .leases
            .values()
            .find(|l| l.annotator == annotator && self.get(&l.item_id).is_some_and(|it| it.lang() == lang));
        if let Some(lease) = held {
            let item = self.get(&lease.item_id).expect("leased items exist").clone();
            return Ok(Some(LeasedItem {
                lease: lease.clone(),
                item,
            }));
        }
        let Some(item) = self
            .items
            .iter()
            .find(|it| it.lang() == lang && !self.leases.contains_key(it.id()) && Self::eligible(it, annotator))
        else {
            return Ok(None);
        };
        let lease = Lease {
            item_id: item.id().to_string(),
            annotator: annotator.to_string(),
            expires_at: now + self.lease_ttl,
        };
        let item = item.clone();
        self.leases.insert(lease.item_id.clone(), lease.clone());
        Ok(Some(LeasedItem { lease, item }))
    }

    /// Drops a lease without writing.
    pub fn release(&mut self, item_id: &str, annotator: &str) -> bool {
        match self.leases.get(item_id) {
            Some(l) if l.annotator == annotator => {
                self.leases.remove(item_id);
                true
            }
            _ => false,
        }
    }

    /// Applies `op` to a copy of item `idx` after the version check.
    fn prepare(&self, idx: usize, op: Op) -> Result<AnnotationItem, AnnotateError> {
        let item = &self.items[idx];
        let given = op.version().expect("write ops carry a version");
        if given != item.version {
            return Err(AnnotateError::Conflict {
                item_id: item.id().to_string(),
                given,
                current: item.version,
            });
        }
        let quorum = op.quorum().unwrap_or(self.quorum);
        let actor = op.actor().map(str::to_string);
        let ctx = TransitionContext {
            quorum,
            lexicons: &self.lexicons,
            actor: actor.as_deref(),
        };
        let mut next = item.clone();
        for event in op.events()? {
            next.apply(event, ctx)?;
        }
        next.version = item.version + 1;
        Ok(next)
    }

    /// Lease check, version check, transition, log, commit.
    fn write(
        &mut self,
        item_id: &str,
        op: impl FnOnce(Option<String>) -> Op,
        annotator: Option<&str>,
    ) -> Result<WriteOutcome, AnnotateError> {
        let idx = self.position(item_id)?;
        let now = self.clock.now();
        let actor = match self.active_lease(item_id, now) {
            Some(l) if annotator.is_some_and(|a| a != l.annotator) => {
                return Err(AnnotateError::LeaseHeld {
                    item_id: item_id.to_string(),
                    holder: l.annotator.clone(),
                })
            }
            Some(l) => Some(l.annotator.clone()),
            None => annotator.map(str::to_string),
        };
        let op = op(actor);
        let updated = self.prepare(idx, op.clone())?;
        self.log_op(item_id, op)?;
        let outcome = WriteOutcome {
            item_id: item_id.to_string(),
            state: updated.state,
            version: updated.version,
        };
        self.items[idx] = updated;
        self.leases.remove(item_id);
        Ok(outcome)
    }

    pub fn submit_question_rating(
        &mut self,
        item_id: &str,
        version: u64,
        annotator: Option<&str>,
        rating: Rating,
        rewrite: Option<&str>,
    ) -> Result<WriteOutcome, AnnotateError> {
        let rewrite = rewrite.map(str::to_string);
        self.write(
            item_id,
            |annotator| Op::QuestionRating {
                version,
                annotator,
                rating,
                rewrite,
            },
            annotator,
        )
    }

    pub fn submit_answer_rating(
        &mut self,
        item_id: &str,
        version: u64,
        annotator: Option<&str>,
        rating: Rating,
        correction: Option<&str>,
    ) -> Result<WriteOutcome, AnnotateError> {
        let correction = correction.map(str::to_string);
        self.write(
            item_id,
            |annotator| Op::AnswerRating {
                version,
                annotator,
                rating,
                correction,
            },
            annotator,
        )
    }

    pub fn submit_expansion(
        &mut self,
        item_id: &str,
        version: u64,
        annotator: &str,
        answers: &[String],
    ) -> Result<WriteOutcome, AnnotateError> {
        let quorum = self.quorum;
        let answers = answers.to_vec();
        let submitter = annotator.to_string();
        self.write(
            item_id,
            move |_| Op::Expansion {
                version,
                annotator: submitter,
                answers,
                quorum,
            },
            Some(annotator),
        )
    }

    pub fn flag_item(
        &mut self,
        item_id: &str,
        version: u64,
        annotator: Option<&str>,
        flags: BTreeSet<Flag>,
    ) -> Result<WriteOutcome, AnnotateError> {
        self.write(
            item_id,
            |annotator| Op::Flags {
                version,
                annotator,
                flags,
            },
            annotator,
        )
    }

    /// Done items in enqueue order. Answers are the primary answer followed
    /// by every expansion answer, deduplicated after normalization.
    pub fn export(&self) -> Benchmark {
        let examples = self
            .items
            .iter()
            .filter(|it| it.state == ItemState::Done)
            .map(|it| self.export_item(it))
            .collect();
        Benchmark::new(examples).expect("queue ids are unique and done items have a primary answer")
    }

    fn export_item(&self, it: &AnnotationItem) -> BenchmarkExample {
        let lang = it.lang();
        let primary = it.primary_answer.clone().expect("done items have a primary answer");
        let mut seen = vec![normalize(&primary, lang)];
        let mut answers = vec![primary.clone()];
        for a in it.expansions.iter().flat_map(|e| &e.answers) {
            let n = normalize(a, lang);
            if !seen.contains(&n) {
                seen.push(n);
                answers.push(a.clone());
            }
        }
        let mut extra = Map::new();
        extra.insert("source".into(), Value::from(it.candidate.source.as_str()));
        if it.nonstandard {
            extra.insert("nonstandard".into(), Value::Bool(true));
        }
        let english = &it.candidate.english_question;
        BenchmarkExample {
            id: it.id().to_string(),
            image_id: it.candidate.image_id.clone(),
            lang,
            question: it.question().to_string(),
            answers,
            category: self.lexicons.answer_category(&primary, lang),
            collection_flag: it.flags.contains(&Flag::Collection),
            english_question: (!english.is_empty()).then(|| english.clone()),
            extra,
        }
    }

    pub fn stats(&self) -> AnnotationStats {
        let mut by_state = BTreeMap::new();
        let mut langs: BTreeMap<LanguageCode, (RatingTally, RatingTally)> = BTreeMap::new();
        for it in &self.items {
            *by_state.entry(it.state).or_insert(0) += 1;
            if let Some(q) = it.question_rating {
                let entry = langs.entry(it.lang()).or_default();
                entry.0.add(q);
                if let Some(a) = it.answer_rating {
                    entry.1.add(a);
                }
            }
        }
        AnnotationStats {
            items: self.items.len(),
            by_state,
            languages: langs
                .into_iter()
                .map(|(lang, (questions, answers))| LanguageRatings {
                    lang,
                    questions,
                    answers,
                })
                .collect(),
        }
    }
}
