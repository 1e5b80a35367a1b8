//! Dictionary-driven Thai word segmentation.
//!
//! Greedy longest match over extended grapheme clusters: at each position the
//! longest dictionary word starting there is taken; when none matches, a single
//! grapheme cluster becomes its own token.

use std::collections::HashSet;

use unicode_normalization::UnicodeNormalization;
use unicode_segmentation::UnicodeSegmentation;

#[derive(Debug, Clone, Default)]
pub struct ThaiDictionary {
    words: HashSet<String>,
    /// Longest entry, in grapheme clusters.
    max_graphemes: usize,
}

impl ThaiDictionary {
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut dict = ThaiDictionary::default();
        for w in words {
            let w = w.as_ref().trim();
            if w.is_empty() || w.starts_with('#') {
                continue;
            }
            let w: String = w.nfc().collect();
            dict.max_graphemes = dict.max_graphemes.max(w.graphemes(true).count());
            dict.words.insert(w);
        }
        dict
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn segment<'a>(&self, text: &'a str) -> Vec<&'a str> {
        let mut bounds: Vec<usize> = text.grapheme_indices(true).map(|(i, _)| i).collect();
        bounds.push(text.len());
        let n = bounds.len() - 1;
        let mut out = Vec::new();
        let mut i = 0;
        while i < n {
            let longest = (i + 1..=n.min(i + self.max_graphemes))
                .rev()
                .find(|&j| self.words.contains(&text[bounds[i]..bounds[j]]));
            let j = longest.unwrap_or(i + 1);
            out.push(&text[bounds[i]..bounds[j]]);
            i = j;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dict() -> ThaiDictionary {
        ThaiDictionary::from_words(["แมว", "สี", "สีขาว", "ขาว", "ต้นไม้", "ต้น", "ไม้"])
    }

    #[test]
    fn longest_match_wins() {
        assert_eq!(dict().segment("แมวสีขาว"), ["แมว", "สีขาว"]);
        assert_eq!(dict().segment("ต้นไม้"), ["ต้นไม้"]);
    }

    #[test]
    fn unknown_falls_back_to_graphemes() {
        // น้ำ is one cluster per consonant: น้ + ำ attaches as a spacing mark
        let seg = dict().segment("แมวน้ำ");
        assert_eq!(seg[0], "แมว");
        assert_eq!(seg[1..].concat(), "น้ำ");
        assert!(seg[1..].iter().all(|g| g.graphemes(true).count() == 1));
    }

    #[test]
    fn empty_dictionary_is_pure_grapheme_split() {
        let d = ThaiDictionary::default();
        assert_eq!(d.segment("กข"), ["ก", "ข"]);
        assert!(d.segment("").is_empty());
    }
}
