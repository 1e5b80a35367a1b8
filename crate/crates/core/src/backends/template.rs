//! Shallow English caption analysis behind the template generators and the
//! echo answerer. Both sides share this parse, which is what keeps the echo
//! answerer consistent with the generator.
//!
//! A noun is a content word introduced by a determiner or a numeral, with
//! any run of color words allowed in between ("two white dogs").

use crate::lang::LanguageCode;
use crate::textproc::{is_numeral, Lexicons};

const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "some", "many", "several", "its", "his", "her", "their", "our",
    "my", "your", "each", "every", "another",
];

const PREPOSITIONS: &[&str] = &[
    "on",
    "in",
    "at",
    "under",
    "near",
    "beside",
    "behind",
    "above",
    "below",
    "with",
    "by",
    "inside",
    "over",
    "along",
    "across",
    "into",
    "onto",
    "from",
    "of",
    "for",
    "through",
    "against",
    "between",
    "around",
    "next",
    "outside",
    "beneath",
    "underneath",
    "toward",
    "towards",
    "among",
    "atop",
];

const CONJUNCTIONS: &[&str] = &["and", "or", "but", "while", "as", "where", "who", "which", "then"];

const OTHER_FUNCTION_WORDS: &[&str] = &[
    "is", "are", "was", "were", "be", "being", "been", "has", "have", "had", "it", "they", "he", "she", "we", "there",
    "here", "very", "not", "no", "to", "up", "down", "out", "off", "what", "how", "why", "when",
];

/// Stand-ins for absent objects in negative and "none" questions.
pub(crate) const DISTRACTORS: &[&str] = &[
    "dog", "cat", "horse", "car", "bicycle", "bird", "boat", "chair", "umbrella", "airplane", "elephant", "giraffe",
    "train", "clock", "pizza",
];

#[derive(Debug, Clone, Copy)]
pub(crate) struct Noun {
    pub idx: usize,
    /// Position of the introducing determiner or numeral.
    pub intro: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Parse<'l> {
    pub tokens: Vec<String>,
    pub nouns: Vec<Noun>,
    lex: &'l Lexicons,
}

impl<'l> Parse<'l> {
    pub fn new(text: &str, lex: &'l Lexicons) -> Self {
        let tokens = lex.normalized_tokens(text, LanguageCode::En).tokens;
        let mut p = Parse {
            tokens,
            nouns: Vec::new(),
            lex,
        };
        let n = p.tokens.len();
        for i in 0..n {
            if !(p.is_determiner(i) || p.is_numeral(i)) {
                continue;
            }
            let mut j = i + 1;
            while j < n && p.is_color(j) {
                j += 1;
            }
            if j < n && p.is_content(j) && !p.nouns.iter().any(|x| x.idx == j) {
                p.nouns.push(Noun { idx: j, intro: i });
            }
        }
        p
    }

    fn tok(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    pub fn is_determiner(&self, i: usize) -> bool {
        DETERMINERS.contains(&self.tok(i))
    }

    pub fn is_preposition(&self, i: usize) -> bool {
        PREPOSITIONS.contains(&self.tok(i))
    }

    pub fn is_color(&self, i: usize) -> bool {
        self.lex.lang(LanguageCode::En).is_color(self.tok(i))
    }

    pub fn is_numeral(&self, i: usize) -> bool {
        let t = self.tok(i);
        is_numeral(t) || self.lex.lang(LanguageCode::En).number_value(t).is_some()
    }

    fn number_value(&self, i: usize) -> Option<u64> {
        let t = self.tok(i);
        t.parse()
            .ok()
            .or_else(|| self.lex.lang(LanguageCode::En).number_value(t))
    }

    pub fn is_content(&self, i: usize) -> bool {
        let t = self.tok(i);
        t.chars().any(char::is_alphabetic)
            && t.chars().all(|c| c.is_alphabetic() || matches!(c, '-' | '\''))
            && !DETERMINERS.contains(&t)
            && !PREPOSITIONS.contains(&t)
            && !CONJUNCTIONS.contains(&t)
            && !OTHER_FUNCTION_WORDS.contains(&t)
            && !self.is_color(i)
            && !self.is_numeral(i)
    }

    fn noun_at(&self, idx: usize) -> Option<&Noun> {
        self.nouns.iter().find(|n| n.idx == idx)
    }

    fn span(&self, from: usize, to_inclusive: usize) -> String {
        self.tokens[from..=to_inclusive].join(" ")
    }

    fn plural(&self, noun: &Noun) -> bool {
        self.is_numeral(noun.intro) && self.number_value(noun.intro).is_some_and(|v| v != 1)
    }

    /// PP from preposition `p` through the first noun after it.
    fn phrase_from(&self, p: usize) -> Option<String> {
        let end = self.nouns.iter().map(|n| n.idx).filter(|&i| i > p).min()?;
        Some(self.span(p, end))
    }

    /// Every (question, answer) the rules produce, first occurrence of each
    /// question only.
    pub fn pairs(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        fn push(out: &mut Vec<(String, String)>, q: String, a: String) {
            if !out.iter().any(|(q2, _)| *q2 == q) {
                out.push((q, a));
            }
        }
        // numeral + noun phrase
        for noun in self.nouns.iter().filter(|n| self.is_numeral(n.intro)) {
            push(
                &mut out,
                format!("how many {}?", self.span(noun.intro + 1, noun.idx)),
                self.tok(noun.intro).to_string(),
            );
        }
        // color + noun
        for i in 0..self.tokens.len().saturating_sub(1) {
            if self.is_color(i) && self.noun_at(i + 1).is_some() {
                push(
                    &mut out,
                    format!("what color is the {}?", self.tok(i + 1)),
                    self.tok(i).to_string(),
                );
            }
        }
        // first preposition with a noun before it; the subject is the last
        // such noun
        for p in 0..self.tokens.len() {
            if !self.is_preposition(p) {
                continue;
            }
            let Some(subject) = self.nouns.iter().filter(|n| n.idx < p).max_by_key(|n| n.idx) else {
                continue;
            };
            if let Some(pp) = self.phrase_from(p) {
                let verb = if self.plural(subject) { "are" } else { "is" };
                push(&mut out, format!("where {verb} the {}?", self.tok(subject.idx)), pp);
            }
            break;
        }
        if out.is_empty() {
            if let Some(first) = self.nouns.first() {
                push(
                    &mut out,
                    "what is in the image?".to_string(),
                    self.tok(first.idx).to_string(),
                );
            }
        }
        out
    }

    fn first_noun_named(&self, words: &[String]) -> Option<&Noun> {
        match words {
            [w] => self.nouns.iter().find(|n| self.tok(n.idx) == w),
            _ => None,
        }
    }

    /// Answers a templated question by slot lookup; empty when no slot
    /// matches.
    pub fn answer(&self, question: &str) -> String {
        let q = self.lex.normalized_tokens(question, LanguageCode::En).tokens;
        let q: Vec<&str> = q.iter().map(String::as_str).collect();
        let found = match q.as_slice() {
            ["how", "many", rest @ ..] if !rest.is_empty() => self
                .nouns
                .iter()
                .filter(|n| self.is_numeral(n.intro))
                .find(|n| self.tokens[n.intro + 1..=n.idx] == *rest)
                .map(|n| self.tok(n.intro).to_string()),
            ["what", "color", "is" | "are", "the", noun] => (0..self.tokens.len().saturating_sub(1))
                .find(|&i| self.is_color(i) && self.tok(i + 1) == *noun && self.noun_at(i + 1).is_some())
                .map(|i| self.tok(i).to_string()),
            ["where", "is" | "are", "the", noun] => {
                let words = [noun.to_string()];
                self.first_noun_named(&words).and_then(|n| {
                    let p = (n.idx + 1..self.tokens.len()).find(|&p| self.is_preposition(p))?;
                    self.phrase_from(p)
                })
            }
            ["what", "is", "in", "the", "image" | "picture" | "photo"] => {
                self.nouns.first().map(|n| self.tok(n.idx).to_string())
            }
            _ => None,
        };
        found.unwrap_or_default()
    }

    /// Distinct nouns in caption order.
    pub fn noun_words(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for n in &self.nouns {
            let w = self.tok(n.idx);
            if !out.contains(&w) {
                out.push(w);
            }
        }
        out
    }

    pub fn mentions(&self, word: &str) -> bool {
        self.tokens
            .iter()
            .any(|t| t == word || t.strip_suffix('s') == Some(word))
    }
}

pub(crate) fn indefinite(noun: &str) -> &'static str {
    if noun.starts_with(['a', 'e', 'i', 'o', 'u']) {
        "an"
    } else {
        "a"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(c: &str) -> Vec<(String, String)> {
        Parse::new(c, Lexicons::bundled()).pairs()
    }

    fn has(c: &str, q: &str, a: &str) -> bool {
        pairs(c).iter().any(|(q2, a2)| q2 == q && a2 == a)
    }

    #[test]
    fn rule_examples() {
        assert!(has("two dogs on the beach", "how many dogs?", "two"));
        assert!(has("two dogs on the beach", "where are the dogs?", "on the beach"));
        assert!(has("a white cat", "what color is the cat?", "white"));
        assert!(has("a cat", "what is in the image?", "cat"));
        assert!(has("Three white horses", "how many white horses?", "three"));
    }

    #[test]
    fn fallback_only_when_nothing_else_fired() {
        assert!(!pairs("a white cat").iter().any(|(q, _)| q == "what is in the image?"));
        assert!(pairs("running fast").is_empty());
    }

    #[test]
    fn where_subject_is_last_noun_before_first_preposition() {
        let c = "a dog in the yard and a cat on the mat";
        assert!(has(c, "where is the dog?", "in the yard"));
        let answer = Parse::new(c, Lexicons::bundled()).answer("where is the dog?");
        assert_eq!(answer, "in the yard");
    }

    #[test]
    fn echo_slots() {
        let p = Parse::new("two dogs on the beach", Lexicons::bundled());
        assert_eq!(p.answer("how many dogs?"), "two");
        assert_eq!(p.answer("How many cats?"), "");
        let p = Parse::new("a white cat", Lexicons::bundled());
        assert_eq!(p.answer("what color is the cat?"), "white");
        assert_eq!(p.answer("what color is the car?"), "");
        assert_eq!(p.answer("who painted this?"), "");
    }

    #[test]
    fn generated_pairs_echo_back() {
        for c in [
            "two dogs on the beach",
            "a dog in the yard and a cat on the mat",
            "dog toys and a dog on a red mat",
            "the two black cats near 3 white chairs",
            "a man with an umbrella",
        ] {
            let p = Parse::new(c, Lexicons::bundled());
            for (q, a) in p.pairs() {
                assert_eq!(p.answer(&q), a, "{c}: {q}");
                assert!(Lexicons::bundled().answer_in_caption(&a, c, LanguageCode::En));
            }
        }
    }
}
