//! English question-type taxonomy, approximated by question prefix.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{normalize, Lexicons};
use crate::lang::LanguageCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuestionPrefix {
    Is,
    WhatIs,
    HowMany,
    Where,
    WhatKind,
    WhatAre,
    Who,
    Are,
    WhatColor,
    A,
    WhatType,
    WhatWas,
    Do,
    In,
    Besides,
    Does,
    Other,
}

impl QuestionPrefix {
    /// Table order; `Other` last.
    pub const ALL: [QuestionPrefix; 17] = [
        QuestionPrefix::Is,
        QuestionPrefix::WhatIs,
        QuestionPrefix::HowMany,
        QuestionPrefix::Where,
        QuestionPrefix::WhatKind,
        QuestionPrefix::WhatAre,
        QuestionPrefix::Who,
        QuestionPrefix::Are,
        QuestionPrefix::WhatColor,
        QuestionPrefix::A,
        QuestionPrefix::WhatType,
        QuestionPrefix::WhatWas,
        QuestionPrefix::Do,
        QuestionPrefix::In,
        QuestionPrefix::Besides,
        QuestionPrefix::Does,
        QuestionPrefix::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QuestionPrefix::Is => "is",
            QuestionPrefix::WhatIs => "what is",
            QuestionPrefix::HowMany => "how many",
            QuestionPrefix::Where => "where",
            QuestionPrefix::WhatKind => "what kind",
            QuestionPrefix::WhatAre => "what are",
            QuestionPrefix::Who => "who",
            QuestionPrefix::Are => "are",
            QuestionPrefix::WhatColor => "what color",
            QuestionPrefix::A => "a",
            QuestionPrefix::WhatType => "what type",
            QuestionPrefix::WhatWas => "what was",
            QuestionPrefix::Do => "do",
            QuestionPrefix::In => "in",
            QuestionPrefix::Besides => "besides",
            QuestionPrefix::Does => "does",
            QuestionPrefix::Other => "other",
        }
    }
}

impl fmt::Display for QuestionPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Longest prefix, matched on whole tokens, of the normalized English
/// question; `Other` when none applies.
pub fn classify_question(english_question: &str) -> QuestionPrefix {
    let tokens = Lexicons::bundled()
        .tokenize(&normalize(english_question, LanguageCode::En), LanguageCode::En)
        .tokens;
    QuestionPrefix::ALL[..16]
        .iter()
        .copied()
        .filter(|p| {
            let words: Vec<&str> = p.as_str().split(' ').collect();
            words.len() <= tokens.len() && words.iter().zip(&tokens).all(|(w, t)| *w == t.as_str())
        })
        .max_by_key(|p| p.as_str().split(' ').count())
        .unwrap_or(QuestionPrefix::Other)
}
