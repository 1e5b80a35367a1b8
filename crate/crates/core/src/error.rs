use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the data layer: language parsing, record validation and
/// JSONL file I/O.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("unknown language tag `{0}`")]
    UnknownLanguage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}", format_diagnostics(.0))]
    Schema(Vec<LineDiagnostic>),

    #[error("duplicate example id `{0}`")]
    DuplicateId(String),

    #[error("invalid record: {0}")]
    Invalid(String),

    #[error("filter trace already closed by a reject; cannot append `{0}`")]
    TraceClosed(String),
}

/// One problem found while loading a JSONL file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineDiagnostic {
    /// 1-based line number.
    pub line: usize,
    pub field: Option<String>,
    pub message: String,
}

impl std::fmt::Display for LineDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.field {
            Some(field) => write!(f, "line {}: field `{}`: {}", self.line, field, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

fn format_diagnostics(diags: &[LineDiagnostic]) -> String {
    let mut out = format!("{} malformed line(s)", diags.len());
    for d in diags.iter().take(5) {
        out.push_str("; ");
        out.push_str(&d.to_string());
    }
    if diags.len() > 5 {
        out.push_str("; ...");
    }
    out
}

impl CoreError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CoreError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
