//! Multilingual visual-question-answering data toolkit.
//!
//! Generates question-answer pairs from image captions through a
//! translation-based pipeline, drives human annotation of the candidates, and
//! scores model predictions with exact match, CIDEr and ROUGE-L.

pub mod adapt;
pub mod annotate;
pub mod backends;
pub mod error;
pub mod eval;
pub mod io;
pub mod lang;
pub mod pipeline;
pub mod stats;
pub mod textproc;
pub mod types;

pub use error::{CoreError, LineDiagnostic};
pub use lang::{LanguageCode, LanguageInfo, Script};
pub use types::{AnswerCategory, Benchmark, BenchmarkExample, CandidateQA, Caption, FilterRecord, Source, Verdict};
