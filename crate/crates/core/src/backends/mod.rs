//! Model-shaped capabilities of the pipeline as object-safe contracts, with
//! deterministic in-process reference implementations and an HTTP adapter.

mod config;
mod reference;
mod remote;
mod template;

pub use config::{BackendSpec, BackendsConfig, ReferenceConfig, RemoteConfig};
pub use reference::{EchoAnswerer, LexiconTranslator, TemplateDirectQg, TemplateQg, TranslationTable};
pub use remote::RemoteBackend;

use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::lang::LanguageCode;
use crate::textproc::{normalize, Lexicons};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("unsupported language pair {src}->{tgt}")]
    UnsupportedPair { src: LanguageCode, tgt: LanguageCode },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("{backend}: transport failure: {message}")]
    Transport { backend: String, message: String },
    #[error("{backend}: HTTP {status}: {message}")]
    Status {
        backend: String,
        status: u16,
        message: String,
    },
    #[error("{backend}: malformed response: {message}")]
    Protocol { backend: String, message: String },
    #[error("backend config: {0}")]
    Config(String),
    #[error("{endpoint} unreachable: {message}")]
    Unreachable { endpoint: String, message: String },
}

pub type BackendResult<T> = std::result::Result<T, BackendError>;

/// What a backend can do. `pairs = None` means the backend does not enumerate
/// its pairs (remote services); requests are then attempted as given.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Capability {
    pub name: String,
    pub concurrent_safe: bool,
    pub pairs: Option<Vec<(LanguageCode, LanguageCode)>>,
}

impl Capability {
    pub fn supports(&self, src: LanguageCode, tgt: LanguageCode) -> bool {
        src == tgt || self.pairs.as_ref().is_none_or(|p| p.contains(&(src, tgt)))
    }
}

/// `translate(x, L, L)` must return `x` unchanged.
pub trait Translator: Send + Sync {
    fn capability(&self) -> Capability;
    fn translate(&self, text: &str, src: LanguageCode, tgt: LanguageCode) -> BackendResult<String>;
}

/// Candidate (question, answer) pairs extracted from an English caption.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QgOutput {
    pub pairs: Vec<(String, String)>,
}

impl QgOutput {
    /// Drops empty answers and repeated pairs, keeping first occurrences.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        let mut out: Vec<(String, String)> = Vec::new();
        for (q, a) in pairs {
            if a.trim().is_empty() || out.iter().any(|(q2, a2)| *q2 == q && *a2 == a) {
                continue;
            }
            out.push((q, a));
        }
        QgOutput { pairs: out }
    }
}

pub trait QuestionGenerator: Send + Sync {
    fn capability(&self) -> Capability;
    fn generate_qa(&self, english_caption: &str) -> BackendResult<QgOutput>;
}

pub trait QuestionAnswerer: Send + Sync {
    fn capability(&self) -> Capability;
    /// Best-effort answer; empty when the context does not answer it.
    fn answer_from_context(&self, question: &str, context: &str) -> BackendResult<String>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectQgRequest {
    pub caption: String,
    pub target_answer: String,
    pub lang: LanguageCode,
}

/// The expected answer class of a direct question.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectAnswerKind {
    Yes,
    No,
    None,
}

impl DirectQgRequest {
    pub fn new(caption: impl Into<String>, target_answer: impl Into<String>, lang: LanguageCode) -> Self {
        DirectQgRequest {
            caption: caption.into(),
            target_answer: target_answer.into(),
            lang,
        }
    }

    /// Classifies the target answer against the language's lexicon.
    pub fn kind(&self, lexicons: &Lexicons) -> BackendResult<DirectAnswerKind> {
        direct_answer_kind(&self.target_answer, self.lang, lexicons)
    }
}

pub fn direct_answer_kind(answer: &str, lang: LanguageCode, lexicons: &Lexicons) -> BackendResult<DirectAnswerKind> {
    use crate::textproc::Polarity;
    let n = normalize(answer, lang);
    let lex = lexicons.lang(lang);
    match lex.polarity(&n) {
        Some(Polarity::Yes) => Ok(DirectAnswerKind::Yes),
        Some(Polarity::No) => Ok(DirectAnswerKind::No),
        None if lex.is_none_form(&n) => Ok(DirectAnswerKind::None),
        None => Err(BackendError::InvalidRequest(format!(
            "`{answer}` is not a yes/no/none form for {lang}"
        ))),
    }
}

pub trait DirectQuestionGenerator: Send + Sync {
    fn capability(&self) -> Capability;
    /// Questions in `request.lang` whose expected answer is the target.
    fn direct_generate(&self, request: &DirectQgRequest) -> BackendResult<Vec<String>>;
}

/// Serializes every call into a backend that is not concurrent-safe.
pub struct Serialized<T: ?Sized> {
    inner: Arc<T>,
    gate: Mutex<()>,
}

impl<T: ?Sized> Serialized<T> {
    pub fn new(inner: Arc<T>) -> Self {
        Serialized {
            inner,
            gate: Mutex::new(()),
        }
    }

    fn with<R>(&self, f: impl FnOnce(&T) -> R) -> R {
        let _held = self.gate.lock().unwrap_or_else(|e| e.into_inner());
        f(&self.inner)
    }
}

/// A gated backend is safe to call from any number of threads.
fn gated(c: Capability) -> Capability {
    Capability {
        concurrent_safe: true,
        ..c
    }
}

impl<T: Translator + ?Sized> Translator for Serialized<T> {
    fn capability(&self) -> Capability {
        gated(self.inner.capability())
    }
    fn translate(&self, text: &str, src: LanguageCode, tgt: LanguageCode) -> BackendResult<String> {
        self.with(|b| b.translate(text, src, tgt))
    }
}

impl<T: QuestionGenerator + ?Sized> QuestionGenerator for Serialized<T> {
    fn capability(&self) -> Capability {
        gated(self.inner.capability())
    }
    fn generate_qa(&self, english_caption: &str) -> BackendResult<QgOutput> {
        self.with(|b| b.generate_qa(english_caption))
    }
}

impl<T: QuestionAnswerer + ?Sized> QuestionAnswerer for Serialized<T> {
    fn capability(&self) -> Capability {
        gated(self.inner.capability())
    }
    fn answer_from_context(&self, question: &str, context: &str) -> BackendResult<String> {
        self.with(|b| b.answer_from_context(question, context))
    }
}

impl<T: DirectQuestionGenerator + ?Sized> DirectQuestionGenerator for Serialized<T> {
    fn capability(&self) -> Capability {
        gated(self.inner.capability())
    }
    fn direct_generate(&self, request: &DirectQgRequest) -> BackendResult<Vec<String>> {
        self.with(|b| b.direct_generate(request))
    }
}

macro_rules! gate_fn {
    ($name:ident, $tr:ident) => {
        fn $name(b: Arc<dyn $tr>) -> Arc<dyn $tr> {
            if b.capability().concurrent_safe {
                b
            } else {
                Arc::new(Serialized::new(b))
            }
        }
    };
}

gate_fn!(gate_translator, Translator);
gate_fn!(gate_qg, QuestionGenerator);
gate_fn!(gate_qa, QuestionAnswerer);
gate_fn!(gate_directqg, DirectQuestionGenerator);

/// One binding per contract. Non-concurrent-safe bindings are wrapped in a
/// [`Serialized`] gate on construction.
#[derive(Clone)]
pub struct Backends {
    pub translator: Arc<dyn Translator>,
    pub qg: Arc<dyn QuestionGenerator>,
    pub qa: Arc<dyn QuestionAnswerer>,
    pub directqg: Arc<dyn DirectQuestionGenerator>,
    remotes: Vec<Arc<RemoteBackend>>,
    lexicons: Arc<Lexicons>,
}

impl fmt::Debug for Backends {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Backends")
            .field("translator", &self.translator.capability().name)
            .field("qg", &self.qg.capability().name)
            .field("qa", &self.qa.capability().name)
            .field("directqg", &self.directqg.capability().name)
            .finish()
    }
}

impl Backends {
    pub fn new(
        translator: Arc<dyn Translator>,
        qg: Arc<dyn QuestionGenerator>,
        qa: Arc<dyn QuestionAnswerer>,
        directqg: Arc<dyn DirectQuestionGenerator>,
    ) -> Self {
        Backends {
            translator: gate_translator(translator),
            qg: gate_qg(qg),
            qa: gate_qa(qa),
            directqg: gate_directqg(directqg),
            remotes: Vec::new(),
            lexicons: Lexicons::shared(),
        }
    }

    /// Text-processing data used by filters alongside these backends.
    pub fn lexicons(&self) -> &Arc<Lexicons> {
        &self.lexicons
    }

    pub fn with_lexicons(mut self, lexicons: Arc<Lexicons>) -> Self {
        self.lexicons = lexicons;
        self
    }

    /// All four reference implementations over the bundled data.
    pub fn reference() -> Self {
        let lexicons = Lexicons::shared();
        let translator: Arc<dyn Translator> = Arc::new(LexiconTranslator::bundled(lexicons.clone()));
        Self::reference_with(lexicons, translator)
    }

    fn reference_with(lexicons: Arc<Lexicons>, translator: Arc<dyn Translator>) -> Self {
        Backends::new(
            translator.clone(),
            Arc::new(TemplateQg::new(lexicons.clone())),
            Arc::new(EchoAnswerer::new(lexicons.clone())),
            Arc::new(TemplateDirectQg::new(lexicons.clone(), translator)),
        )
        .with_lexicons(lexicons)
    }

    /// Binds each contract as the config says.
    pub fn from_config(config: &BackendsConfig) -> BackendResult<Self> {
        let lexicons = config.reference.lexicons()?;
        let tables = config.reference.tables()?;
        let mut remotes = Vec::new();
        let mut remote = |spec: &BackendSpec| -> BackendResult<Option<Arc<RemoteBackend>>> {
            match spec {
                BackendSpec::Reference => Ok(None),
                BackendSpec::Remote(url) => {
                    let r = Arc::new(RemoteBackend::new(url, &config.remote)?);
                    remotes.push(r.clone());
                    Ok(Some(r))
                }
            }
        };
        let translator: Arc<dyn Translator> = match remote(&config.translator)? {
            Some(r) => gate_translator(r),
            None => Arc::new(LexiconTranslator::new(tables, lexicons.clone())),
        };
        let qg: Arc<dyn QuestionGenerator> = match remote(&config.qg)? {
            Some(r) => r,
            None => Arc::new(TemplateQg::new(lexicons.clone())),
        };
        let qa: Arc<dyn QuestionAnswerer> = match remote(&config.qa)? {
            Some(r) => r,
            None => Arc::new(EchoAnswerer::new(lexicons.clone())),
        };
        let directqg: Arc<dyn DirectQuestionGenerator> = match remote(&config.directqg)? {
            Some(r) => r,
            None => Arc::new(TemplateDirectQg::new(lexicons.clone(), translator.clone())),
        };
        let mut b = Backends::new(translator, qg, qa, directqg).with_lexicons(lexicons);
        b.remotes = remotes;
        Ok(b)
    }

    /// Connect check on every remote binding.
    pub fn health_check(&self) -> BackendResult<()> {
        self.remotes.iter().try_for_each(|r| r.health_check())
    }
}
