//! Deterministic in-process backends. All are pure and concurrent-safe.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use unicode_normalization::UnicodeNormalization;

use super::template::{indefinite, Parse, DISTRACTORS};
use super::{
    BackendError, BackendResult, Capability, DirectAnswerKind, DirectQgRequest, DirectQuestionGenerator, QgOutput,
    QuestionAnswerer, QuestionGenerator, Translator,
};
use crate::error::{CoreError, Result};
use crate::lang::LanguageCode;
use crate::textproc::{is_separator, is_terminal_punct, Lexicons};

/// Word and phrase mappings for one direction. Keys are NFC and lowercased
/// for cased source languages; an empty value deletes the source word.
#[derive(Debug, Clone)]
pub struct TranslationTable {
    pub src: LanguageCode,
    pub tgt: LanguageCode,
    entries: HashMap<String, String>,
    /// Longest key, in words (or tokens for unsegmented scripts).
    max_words: usize,
}

impl TranslationTable {
    fn empty(src: LanguageCode, tgt: LanguageCode) -> Self {
        TranslationTable {
            src,
            tgt,
            entries: HashMap::new(),
            max_words: 1,
        }
    }

    fn key_len(&self, key: &str) -> usize {
        if self.src.whitespace_delimited() {
            key.split(' ').count()
        } else {
            Lexicons::bundled().tokenize(key, self.src).len().max(1)
        }
    }

    fn insert(&mut self, key: String, value: String) {
        let n = self.key_len(&key);
        if self.entries.contains_key(&key) {
            return;
        }
        self.max_words = self.max_words.max(n);
        self.entries.insert(key, value);
    }

    fn fold(lang: LanguageCode, s: &str) -> String {
        let s: String = s.trim().nfc().collect();
        if lang.has_letter_case() {
            s.to_lowercase()
        } else {
            s
        }
    }

    /// Parses `src<TAB>tgt` lines, returning the forward table and its
    /// inverse. The first source listed for a target wins in the inverse.
    pub fn parse_pair(src: LanguageCode, tgt: LanguageCode, body: &str, file: &str) -> Result<(Self, Self)> {
        let mut fwd = Self::empty(src, tgt);
        let mut inv = Self::empty(tgt, src);
        for (i, line) in body.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (a, b) = line
                .split_once('\t')
                .ok_or_else(|| CoreError::Invalid(format!("{file}:{}: expected source<TAB>target", i + 1)))?;
            let a = Self::fold(src, a);
            let b = Self::fold(tgt, b);
            if a.is_empty() {
                return Err(CoreError::Invalid(format!("{file}:{}: empty source", i + 1)));
            }
            if !b.is_empty() {
                inv.insert(b.clone(), a.clone());
            }
            fwd.insert(a, b);
        }
        Ok((fwd, inv))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, key: &str) -> Option<&str> {
        self.entries.get(&Self::fold(self.src, key)).map(String::as_str)
    }

    /// Word-by-word with greedy longest-phrase matching, source order kept,
    /// unknown words passed through and surrounding punctuation reattached.
    pub fn apply(&self, text: &str, lexicons: &Lexicons) -> String {
        let pieces = if self.src.whitespace_delimited() {
            split_words(text)
        } else {
            split_unsegmented(text, self.src, lexicons)
        };
        let joiner = if self.src.whitespace_delimited() { " " } else { "" };
        let mut out: Vec<String> = Vec::new();
        let mut i = 0;
        while i < pieces.len() {
            let mut matched = None;
            for k in (1..=self.max_words.min(pieces.len() - i)).rev() {
                let run = &pieces[i..i + k];
                if run.iter().any(|p| p.core.is_empty()) {
                    continue;
                }
                // inner boundaries must be punctuation-free
                if run[..k - 1].iter().any(|p| !p.trail.is_empty()) || run[1..].iter().any(|p| !p.lead.is_empty()) {
                    continue;
                }
                let key = run.iter().map(|p| p.core.as_str()).collect::<Vec<_>>().join(joiner);
                if let Some(v) = self.lookup(&key) {
                    matched = Some((k, v.to_string()));
                    break;
                }
            }
            let (k, core) = matched.unwrap_or_else(|| (1, pieces[i].core.clone()));
            let lead = &pieces[i].lead;
            let trail = &pieces[i + k - 1].trail;
            let word = format!("{lead}{core}{trail}");
            if core.is_empty() {
                if !word.is_empty() {
                    match out.last_mut() {
                        Some(prev) => prev.push_str(&word),
                        None => out.push(word),
                    }
                }
            } else {
                out.push(word);
            }
            i += k;
        }
        let joiner = if self.tgt.whitespace_delimited() { " " } else { "" };
        out.join(joiner)
    }
}

#[derive(Debug)]
struct Piece {
    lead: String,
    core: String,
    trail: String,
}

fn split_words(text: &str) -> Vec<Piece> {
    text.split_whitespace()
        .map(|w| {
            let start = w.find(|c: char| !is_separator(c)).unwrap_or(w.len());
            let end = w
                .char_indices()
                .rev()
                .find(|(_, c)| !is_separator(*c))
                .map_or(start, |(i, c)| i + c.len_utf8());
            Piece {
                lead: w[..start].to_string(),
                core: w[start..end.max(start)].to_string(),
                trail: w[end.max(start)..].to_string(),
            }
        })
        .collect()
}

fn split_unsegmented(text: &str, lang: LanguageCode, lexicons: &Lexicons) -> Vec<Piece> {
    let text: String = text.nfc().collect();
    let trimmed = text.trim_end();
    let body = trimmed.trim_end_matches(is_terminal_punct);
    let mut pieces: Vec<Piece> = lexicons
        .tokenize(body, lang)
        .tokens
        .into_iter()
        .map(|core| Piece {
            lead: String::new(),
            core,
            trail: String::new(),
        })
        .collect();
    let tail = &trimmed[body.len()..];
    if !tail.is_empty() {
        match pieces.last_mut() {
            Some(p) => p.trail.push_str(tail),
            None => pieces.push(Piece {
                lead: tail.to_string(),
                core: String::new(),
                trail: String::new(),
            }),
        }
    }
    pieces
}

const BUNDLED_TABLES: [(&str, &str); 6] = [
    ("fr", include_str!("../../assets/translation/fr-en.tsv")),
    ("hi", include_str!("../../assets/translation/hi-en.tsv")),
    ("iw", include_str!("../../assets/translation/iw-en.tsv")),
    ("ro", include_str!("../../assets/translation/ro-en.tsv")),
    ("th", include_str!("../../assets/translation/th-en.tsv")),
    ("zh", include_str!("../../assets/translation/zh-en.tsv")),
];

/// Lexicon-driven translator. Pairs without a direct table pivot through
/// English when both legs exist.
#[derive(Debug, Clone)]
pub struct LexiconTranslator {
    tables: HashMap<(LanguageCode, LanguageCode), TranslationTable>,
    lexicons: Arc<Lexicons>,
}

impl LexiconTranslator {
    pub fn new(tables: Vec<TranslationTable>, lexicons: Arc<Lexicons>) -> Self {
        LexiconTranslator {
            tables: tables.into_iter().map(|t| ((t.src, t.tgt), t)).collect(),
            lexicons,
        }
    }

    pub fn bundled_tables() -> Vec<TranslationTable> {
        let mut out = Vec::new();
        for (lang, body) in BUNDLED_TABLES {
            let src: LanguageCode = lang.parse().expect("bundled table language");
            let (f, i) = TranslationTable::parse_pair(src, LanguageCode::En, body, lang)
                .expect("bundled translation tables are well-formed");
            out.push(f);
            out.push(i);
        }
        out
    }

    /// Reads every `<src>-<tgt>.tsv` in `dir`, each giving both directions.
    pub fn load_tables(dir: &Path) -> Result<Vec<TranslationTable>> {
        let mut names: Vec<_> = fs::read_dir(dir)
            .map_err(|e| CoreError::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "tsv"))
            .collect();
        names.sort();
        let mut out = Vec::new();
        for path in names {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            let (a, b) = stem
                .split_once('-')
                .ok_or_else(|| CoreError::Invalid(format!("{}: expected <src>-<tgt>.tsv", path.display())))?;
            let body = fs::read_to_string(&path).map_err(|e| CoreError::io(&path, e))?;
            let (f, i) = TranslationTable::parse_pair(a.parse()?, b.parse()?, &body, &path.display().to_string())?;
            out.push(f);
            out.push(i);
        }
        Ok(out)
    }

    pub fn bundled(lexicons: Arc<Lexicons>) -> Self {
        Self::new(Self::bundled_tables(), lexicons)
    }

    fn pairs(&self) -> BTreeSet<(LanguageCode, LanguageCode)> {
        let mut pairs: BTreeSet<_> = self.tables.keys().copied().collect();
        for &(a, b) in self.tables.keys() {
            if b != LanguageCode::En {
                continue;
            }
            for &(c, d) in self.tables.keys() {
                if c == LanguageCode::En && d != a {
                    pairs.insert((a, d));
                }
            }
        }
        for l in LanguageCode::all() {
            pairs.insert((l, l));
        }
        pairs
    }
}

impl Translator for LexiconTranslator {
    fn capability(&self) -> Capability {
        Capability {
            name: "reference:lexicon".into(),
            concurrent_safe: true,
            pairs: Some(self.pairs().into_iter().collect()),
        }
    }

    fn translate(&self, text: &str, src: LanguageCode, tgt: LanguageCode) -> BackendResult<String> {
        if src == tgt {
            return Ok(text.to_string());
        }
        let out = if let Some(t) = self.tables.get(&(src, tgt)) {
            t.apply(text, &self.lexicons)
        } else {
            match (
                self.tables.get(&(src, LanguageCode::En)),
                self.tables.get(&(LanguageCode::En, tgt)),
            ) {
                (Some(a), Some(b)) => b.apply(&a.apply(text, &self.lexicons), &self.lexicons),
                _ => return Err(BackendError::UnsupportedPair { src, tgt }),
            }
        };
        if out.trim().is_empty() && !text.trim().is_empty() {
            return Ok(text.to_string());
        }
        Ok(out)
    }
}

fn reference_capability(name: &str) -> Capability {
    Capability {
        name: format!("reference:{name}"),
        concurrent_safe: true,
        pairs: None,
    }
}

/// Rule-based English question generation: numeral, color, preposition and
/// noun-fallback templates.
#[derive(Debug, Clone)]
pub struct TemplateQg {
    lexicons: Arc<Lexicons>,
}

impl TemplateQg {
    pub fn new(lexicons: Arc<Lexicons>) -> Self {
        TemplateQg { lexicons }
    }
}

impl QuestionGenerator for TemplateQg {
    fn capability(&self) -> Capability {
        reference_capability("template-qg")
    }

    fn generate_qa(&self, english_caption: &str) -> BackendResult<QgOutput> {
        Ok(QgOutput::from_pairs(
            Parse::new(english_caption, &self.lexicons).pairs(),
        ))
    }
}

/// Answers template questions by looking up the matching slot in the context.
#[derive(Debug, Clone)]
pub struct EchoAnswerer {
    lexicons: Arc<Lexicons>,
}

impl EchoAnswerer {
    pub fn new(lexicons: Arc<Lexicons>) -> Self {
        EchoAnswerer { lexicons }
    }
}

impl QuestionAnswerer for EchoAnswerer {
    fn capability(&self) -> Capability {
        reference_capability("echo-qa")
    }

    fn answer_from_context(&self, question: &str, context: &str) -> BackendResult<String> {
        Ok(Parse::new(context, &self.lexicons).answer(question))
    }
}

/// Existence and counting questions with yes/no/none answers. Non-English
/// requests are generated in English and routed through the translator.
#[derive(Clone)]
pub struct TemplateDirectQg {
    lexicons: Arc<Lexicons>,
    translator: Arc<dyn Translator>,
}

const DIRECT_PER_KIND: usize = 3;

impl TemplateDirectQg {
    pub fn new(lexicons: Arc<Lexicons>, translator: Arc<dyn Translator>) -> Self {
        TemplateDirectQg { lexicons, translator }
    }

    fn english(&self, caption: &str, kind: DirectAnswerKind) -> Vec<String> {
        let parse = Parse::new(caption, &self.lexicons);
        let absent = || DISTRACTORS.iter().filter(|d| !parse.mentions(d)).take(DIRECT_PER_KIND);
        match kind {
            DirectAnswerKind::Yes => parse
                .noun_words()
                .into_iter()
                .take(DIRECT_PER_KIND)
                .map(|n| format!("is there {} {n} in the image?", indefinite(n)))
                .collect(),
            DirectAnswerKind::No => absent()
                .map(|d| format!("is there {} {d} in the image?", indefinite(d)))
                .collect(),
            DirectAnswerKind::None => absent().map(|d| format!("how many {d}s are in the image?")).collect(),
        }
    }
}

impl DirectQuestionGenerator for TemplateDirectQg {
    fn capability(&self) -> Capability {
        Capability {
            concurrent_safe: self.translator.capability().concurrent_safe,
            ..reference_capability("template-directqg")
        }
    }

    fn direct_generate(&self, request: &DirectQgRequest) -> BackendResult<Vec<String>> {
        let kind = request.kind(&self.lexicons)?;
        let en = LanguageCode::En;
        let caption = self.translator.translate(&request.caption, request.lang, en)?;
        self.english(&caption, kind)
            .into_iter()
            .map(|q| self.translator.translate(&q, en, request.lang))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use LanguageCode::*;

    fn tr() -> LexiconTranslator {
        LexiconTranslator::bundled(Lexicons::shared())
    }

    #[test]
    fn identity_and_word_by_word() {
        let t = tr();
        assert_eq!(t.translate("chat blanc", Fr, Fr).unwrap(), "chat blanc");
        assert_eq!(t.translate("chat blanc", Fr, En).unwrap(), "cat white");
        assert_eq!(t.translate("chat zorglub", Fr, En).unwrap(), "cat zorglub");
        assert_eq!(t.translate("Un chat blanc.", Fr, En).unwrap(), "a cat white.");
    }

    #[test]
    fn inverse_uses_first_listed_source() {
        let t = tr();
        assert_eq!(t.translate("white", En, Ro).unwrap(), "alb");
        assert_eq!(t.translate("how many dogs?", En, Fr).unwrap(), "combien chiens?");
    }

    #[test]
    fn unsegmented_scripts() {
        let t = tr();
        assert_eq!(t.translate("แมวสีขาว", Th, En).unwrap(), "cat white");
        assert_eq!(t.translate("一只白猫", Zh, En).unwrap(), "a white cat");
        assert_eq!(t.translate("white cat", En, Zh).unwrap(), "白猫");
        assert_eq!(t.translate("what color?", En, Th).unwrap(), "อะไรสี?");
    }

    #[test]
    fn pivot_and_unsupported() {
        let t = tr();
        assert_eq!(t.translate("chat", Fr, Ro).unwrap(), "pisică");
        assert!(t.capability().supports(Fr, Ro));
        assert_eq!(
            t.translate("x", Ko, En),
            Err(BackendError::UnsupportedPair { src: Ko, tgt: En })
        );
    }

    #[test]
    fn template_qg_and_echo() {
        let lex = Lexicons::shared();
        let qg = TemplateQg::new(lex.clone());
        let qa = EchoAnswerer::new(lex);
        let out = qg.generate_qa("two dogs on the beach").unwrap();
        assert!(out.pairs.contains(&("how many dogs?".into(), "two".into())));
        assert_eq!(
            qa.answer_from_context("how many dogs?", "two dogs on the beach")
                .unwrap(),
            "two"
        );
        assert_eq!(
            qa.answer_from_context("what color is the car?", "a white cat").unwrap(),
            ""
        );
    }

    #[test]
    fn direct_templates() {
        let lex = Lexicons::shared();
        let d = TemplateDirectQg::new(lex.clone(), Arc::new(tr()));
        let no = d
            .direct_generate(&DirectQgRequest::new("a white cat", "no", En))
            .unwrap();
        assert!(no.contains(&"is there a dog in the image?".to_string()));
        assert!(!no.iter().any(|q| q.contains("cat")));
        let yes = d
            .direct_generate(&DirectQgRequest::new("a white cat", "yes", En))
            .unwrap();
        assert_eq!(yes, ["is there a cat in the image?"]);
        let none = d
            .direct_generate(&DirectQgRequest::new("a white cat", "none", En))
            .unwrap();
        assert_eq!(none[0], "how many dogs are in the image?");
        assert!(matches!(
            d.direct_generate(&DirectQgRequest::new("a white cat", "maybe", En)),
            Err(BackendError::InvalidRequest(_))
        ));
        let fr = d
            .direct_generate(&DirectQgRequest::new("un chat blanc", "non", Fr))
            .unwrap();
        assert!(fr.iter().any(|q| q.contains("chien")), "{fr:?}");
    }

    #[test]
    fn table_file_errors() {
        assert!(TranslationTable::parse_pair(Fr, En, "chat cat\n", "t").is_err());
        let (f, i) = TranslationTable::parse_pair(Fr, En, "# c\nChat\tCat\nmatou\tcat\n", "t").unwrap();
        assert_eq!(f.lookup("CHAT"), Some("cat"));
        assert_eq!(i.lookup("cat"), Some("chat"));
        assert_eq!(i.len(), 1);
    }
}
