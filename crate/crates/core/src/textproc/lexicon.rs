//! Per-language word lists: boolean answers, colors, number words, "none"
//! forms, plus the Thai segmentation dictionary.
//!
//! On-disk layout (every file optional, UTF-8, `#` starts a comment line):
//!
//! ```text
//! lexicons/<lang>/boolean.txt   form<TAB>yes|no      first form per polarity is canonical
//! lexicons/<lang>/colors.txt    form[<TAB>canonical]
//! lexicons/<lang>/numbers.txt   word<TAB>value
//! lexicons/<lang>/none.txt      form                 first line is canonical
//! dict/th.txt                   one word per line
//! ```

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use super::normalize;
use super::thai::ThaiDictionary;
use crate::error::{CoreError, Result};
use crate::lang::LanguageCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Yes,
    No,
}

#[derive(Debug, Clone, Default)]
pub struct LanguageLexicon {
    boolean: HashMap<String, Polarity>,
    canonical_yes: Option<String>,
    canonical_no: Option<String>,
    colors: HashMap<String, String>,
    numbers: HashMap<String, u64>,
    none: Vec<String>,
}

impl LanguageLexicon {
    pub fn polarity(&self, normalized: &str) -> Option<Polarity> {
        self.boolean.get(normalized).copied()
    }

    pub fn canonical_boolean(&self, polarity: Polarity) -> Option<&str> {
        match polarity {
            Polarity::Yes => self.canonical_yes.as_deref(),
            Polarity::No => self.canonical_no.as_deref(),
        }
    }

    pub fn canonical_color(&self, normalized: &str) -> Option<&str> {
        self.colors.get(normalized).map(String::as_str)
    }

    pub fn is_color(&self, normalized: &str) -> bool {
        self.colors.contains_key(normalized)
    }

    pub fn number_value(&self, normalized: &str) -> Option<u64> {
        self.numbers.get(normalized).copied()
    }

    pub fn is_none_form(&self, normalized: &str) -> bool {
        self.none.iter().any(|n| n == normalized)
    }

    pub fn canonical_none(&self) -> Option<&str> {
        self.none.first().map(String::as_str)
    }

    fn parse_boolean(&mut self, lang: LanguageCode, body: &str, file: &str) -> Result<()> {
        for (lineno, line) in entries(body) {
            let (form, pol) = line
                .split_once('\t')
                .ok_or_else(|| bad(file, lineno, "expected form<TAB>yes|no"))?;
            let pol = match pol.trim() {
                "yes" => Polarity::Yes,
                "no" => Polarity::No,
                other => return Err(bad(file, lineno, &format!("unknown polarity `{other}`"))),
            };
            let form = normalize(form, lang);
            let slot = match pol {
                Polarity::Yes => &mut self.canonical_yes,
                Polarity::No => &mut self.canonical_no,
            };
            if slot.is_none() {
                *slot = Some(form.clone());
            }
            self.boolean.entry(form).or_insert(pol);
        }
        Ok(())
    }

    fn parse_colors(&mut self, lang: LanguageCode, body: &str) {
        for (_, line) in entries(body) {
            let (form, canonical) = match line.split_once('\t') {
                Some((f, c)) => (normalize(f, lang), normalize(c, lang)),
                None => {
                    let f = normalize(line, lang);
                    (f.clone(), f)
                }
            };
            self.colors.entry(form).or_insert(canonical);
        }
    }

    fn parse_numbers(&mut self, lang: LanguageCode, body: &str, file: &str) -> Result<()> {
        for (lineno, line) in entries(body) {
            let (word, value) = line
                .split_once('\t')
                .ok_or_else(|| bad(file, lineno, "expected word<TAB>value"))?;
            let value: u64 = value
                .trim()
                .parse()
                .map_err(|_| bad(file, lineno, &format!("`{value}` is not a cardinal")))?;
            self.numbers.entry(normalize(word, lang)).or_insert(value);
        }
        Ok(())
    }

    fn parse_none(&mut self, lang: LanguageCode, body: &str) {
        for (_, line) in entries(body) {
            let form = normalize(line, lang);
            if !self.none.contains(&form) {
                self.none.push(form);
            }
        }
    }
}

/// All lexical data used by text processing, keyed by language.
#[derive(Debug, Clone)]
pub struct Lexicons {
    langs: HashMap<LanguageCode, LanguageLexicon>,
    thai: ThaiDictionary,
    empty: LanguageLexicon,
}

macro_rules! bundled_lang {
    ($lang:literal) => {
        (
            $lang,
            include_str!(concat!("../../assets/lexicons/", $lang, "/boolean.txt")),
            include_str!(concat!("../../assets/lexicons/", $lang, "/colors.txt")),
            include_str!(concat!("../../assets/lexicons/", $lang, "/numbers.txt")),
            include_str!(concat!("../../assets/lexicons/", $lang, "/none.txt")),
        )
    };
}

const BUNDLED: [(&str, &str, &str, &str, &str); 7] = [
    bundled_lang!("en"),
    bundled_lang!("fr"),
    bundled_lang!("hi"),
    bundled_lang!("iw"),
    bundled_lang!("ro"),
    bundled_lang!("th"),
    bundled_lang!("zh"),
];

const BUNDLED_THAI_DICT: &str = include_str!("../../assets/dict/th.txt");

impl Lexicons {
    /// The defaults shipped with the crate, built once per process.
    pub fn bundled() -> &'static Lexicons {
        static BUNDLED_LEXICONS: OnceLock<Lexicons> = OnceLock::new();
        BUNDLED_LEXICONS.get_or_init(|| Lexicons::build_bundled().expect("bundled lexicons are well-formed"))
    }

    /// The bundled lexicons behind a shared handle.
    pub fn shared() -> Arc<Lexicons> {
        static SHARED: OnceLock<Arc<Lexicons>> = OnceLock::new();
        SHARED.get_or_init(|| Arc::new(Lexicons::bundled().clone())).clone()
    }

    fn build_bundled() -> Result<Lexicons> {
        let mut langs = HashMap::new();
        for (tag, boolean, colors, numbers, none) in BUNDLED {
            let lang: LanguageCode = tag.parse()?;
            let mut lex = LanguageLexicon::default();
            lex.parse_boolean(lang, boolean, "boolean.txt")?;
            lex.parse_colors(lang, colors);
            lex.parse_numbers(lang, numbers, "numbers.txt")?;
            lex.parse_none(lang, none);
            langs.insert(lang, lex);
        }
        Ok(Lexicons {
            langs,
            thai: ThaiDictionary::from_words(BUNDLED_THAI_DICT.lines()),
            empty: LanguageLexicon::default(),
        })
    }

    /// Loads lexicons from `root`, starting from the bundled defaults. Each
    /// file present on disk replaces the corresponding bundled list.
    pub fn load_dir(root: &Path) -> Result<Lexicons> {
        let mut out = Lexicons::bundled().clone();
        for lang in LanguageCode::all() {
            let dir = root.join("lexicons").join(lang.as_str());
            if !dir.is_dir() {
                continue;
            }
            let lex = out.langs.entry(lang).or_default();
            if let Some(body) = read_optional(&dir.join("boolean.txt"))? {
                lex.boolean.clear();
                lex.canonical_yes = None;
                lex.canonical_no = None;
                lex.parse_boolean(lang, &body, &dir.join("boolean.txt").display().to_string())?;
            }
            if let Some(body) = read_optional(&dir.join("colors.txt"))? {
                lex.colors.clear();
                lex.parse_colors(lang, &body);
            }
            if let Some(body) = read_optional(&dir.join("numbers.txt"))? {
                lex.numbers.clear();
                lex.parse_numbers(lang, &body, &dir.join("numbers.txt").display().to_string())?;
            }
            if let Some(body) = read_optional(&dir.join("none.txt"))? {
                lex.none.clear();
                lex.parse_none(lang, &body);
            }
        }
        if let Some(body) = read_optional(&root.join("dict").join("th.txt"))? {
            out.thai = ThaiDictionary::from_words(body.lines());
        }
        Ok(out)
    }

    pub fn lang(&self, lang: LanguageCode) -> &LanguageLexicon {
        self.langs.get(&lang).unwrap_or(&self.empty)
    }

    pub fn thai(&self) -> &ThaiDictionary {
        &self.thai
    }

    pub fn with_thai_dictionary(mut self, dict: ThaiDictionary) -> Self {
        self.thai = dict;
        self
    }
}

fn entries(body: &str) -> impl Iterator<Item = (usize, &str)> {
    body.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

fn bad(file: &str, line: usize, msg: &str) -> CoreError {
    CoreError::Invalid(format!("{file}:{line}: {msg}"))
}

fn read_optional(path: &Path) -> Result<Option<String>> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(CoreError::io(path, e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_canonical_forms() {
        let lex = Lexicons::bundled();
        let fr = lex.lang(LanguageCode::Fr);
        assert_eq!(fr.canonical_boolean(Polarity::Yes), Some("oui"));
        assert_eq!(fr.canonical_boolean(Polarity::No), Some("non"));
        assert_eq!(fr.canonical_color("blanche"), Some("blanc"));
        assert_eq!(lex.lang(LanguageCode::En).number_value("two"), Some(2));
        assert_eq!(lex.lang(LanguageCode::Ro).canonical_color("albă"), Some("alb"));
        assert_eq!(lex.lang(LanguageCode::Zh).canonical_none(), Some("没有"));
        for lang in LanguageCode::BENCHMARK {
            let l = lex.lang(lang);
            assert!(l.canonical_boolean(Polarity::Yes).is_some(), "{lang}");
            assert!(l.canonical_boolean(Polarity::No).is_some(), "{lang}");
            assert!(l.canonical_none().is_some(), "{lang}");
        }
        assert!(lex.thai().contains("แมว"));
    }

    #[test]
    fn unregistered_lexicon_is_empty() {
        let de = Lexicons::bundled().lang(LanguageCode::De);
        assert!(de.polarity("ja").is_none());
    }

    #[test]
    fn load_dir_overrides_only_present_files() {
        let dir = tempfile::tempdir().unwrap();
        let en = dir.path().join("lexicons/en");
        fs::create_dir_all(&en).unwrap();
        fs::write(en.join("colors.txt"), "# custom\nscarlet\tred\nred\n").unwrap();
        fs::create_dir_all(dir.path().join("dict")).unwrap();
        fs::write(dir.path().join("dict/th.txt"), "กขค\n").unwrap();
        let lex = Lexicons::load_dir(dir.path()).unwrap();
        let en = lex.lang(LanguageCode::En);
        assert_eq!(en.canonical_color("scarlet"), Some("red"));
        assert!(!en.is_color("white"));
        assert_eq!(en.polarity("yes"), Some(Polarity::Yes));
        assert!(lex.thai().contains("กขค"));
        assert!(!lex.thai().contains("แมว"));
    }

    #[test]
    fn malformed_numbers_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let en = dir.path().join("lexicons/en");
        fs::create_dir_all(&en).unwrap();
        fs::write(en.join("numbers.txt"), "two\tdeux\n").unwrap();
        let err = Lexicons::load_dir(dir.path()).unwrap_err();
        assert!(err.to_string().contains(":1:"), "{err}");
    }
}
