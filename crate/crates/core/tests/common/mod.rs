//! Shared fixtures and brute-force oracles for the integration tests.
//!
//! The oracles restate each formula directly, with dense vectors and
//! exhaustive search, and share no code with the crate's kernels.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};

use mvqa_core::{AnswerCategory, Benchmark, BenchmarkExample, CandidateQA, Caption, LanguageCode, Source};

pub const ORACLE_TOL: f64 = 1e-9;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn count_of(gram: &[String], tokens: &[String]) -> f64 {
    if gram.len() > tokens.len() {
        return 0.0;
    }
    tokens.windows(gram.len()).filter(|w| *w == gram).count() as f64
}

fn grams_of(tokens: &[String], n: usize) -> Vec<Vec<String>> {
    if tokens.len() < n {
        return Vec::new();
    }
    tokens.windows(n).map(|w| w.to_vec()).collect()
}

/// CIDEr straight from its definition. `d` selects clipped numerators and
/// the Gaussian length penalty (sigma 6).
pub fn cider_oracle(cands: &[Vec<String>], refs: &[Vec<Vec<String>>], d: bool) -> f64 {
    let n_docs = cands.len() as f64;
    let mut total = 0.0;
    for i in 0..cands.len() {
        let mut score = 0.0;
        for n in 1..=4 {
            let mut vocab: Vec<Vec<String>> = Vec::new();
            for g in grams_of(&cands[i], n)
                .into_iter()
                .chain(refs[i].iter().flat_map(|r| grams_of(r, n)))
            {
                if !vocab.contains(&g) {
                    vocab.push(g);
                }
            }
            let idf: Vec<f64> = vocab
                .iter()
                .map(|g| {
                    let df = refs.iter().filter(|rs| rs.iter().any(|r| count_of(g, r) > 0.0)).count() as f64;
                    (n_docs / df.max(1.0)).ln()
                })
                .collect();
            let vec_of =
                |t: &[String]| -> Vec<f64> { vocab.iter().zip(&idf).map(|(g, w)| count_of(g, t) * w).collect() };
            let vc = vec_of(&cands[i]);
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut s = 0.0;
            for r in &refs[i] {
                let vr = vec_of(r);
                let (nc, nr) = (norm(&vc), norm(&vr));
                if nc == 0.0 || nr == 0.0 {
                    continue;
                }
                let num: f64 = vc
                    .iter()
                    .zip(&vr)
                    .map(|(&x, &y)| if d { x.min(y) * y } else { x * y })
                    .sum();
                let mut cos = num / (nc * nr);
                if d {
                    let delta = cands[i].len() as f64 - r.len() as f64;
                    cos *= (-(delta * delta) / 72.0).exp();
                }
                s += cos;
            }
            score += s / refs[i].len() as f64 / 4.0;
        }
        total += 10.0 * score;
    }
    total / n_docs
}

/// LCS by trying every subsequence of `a`.
fn lcs_exhaustive(a: &[String], b: &[String]) -> usize {
    assert!(a.len() <= 16);
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let len = mask.count_ones() as usize;
        if len <= best {
            continue;
        }
        let sub: Vec<&String> = (0..a.len()).filter(|i| mask & (1 << i) != 0).map(|i| &a[i]).collect();
        let mut it = b.iter();
        if sub.iter().all(|s| it.any(|x| x == *s)) {
            best = len;
        }
    }
    best
}

pub fn rouge_oracle(cand: &[String], refs: &[Vec<String>]) -> f64 {
    let beta2 = 1.2f64 * 1.2;
    refs.iter()
        .map(|r| {
            let l = lcs_exhaustive(cand, r) as f64;
            if l == 0.0 {
                return 0.0;
            }
            let p = l / cand.len() as f64;
            let rec = l / r.len() as f64;
            (1.0 + beta2) * p * rec / (rec + beta2 * p)
        })
        .fold(0.0, f64::max)
}

const VOCAB: [&str; 6] = ["cat", "dog", "white", "two", "mat", "red"];

fn tokens(rng: &mut StdRng, max: usize) -> Vec<String> {
    let n = rng.random_range(0..=max);
    (0..n).map(|_| VOCAB.choose(rng).unwrap().to_string()).collect()
}

/// A tokenized corpus of 2 to 6 examples, each with 1 to 3 references of at
/// most 8 tokens.
pub fn random_corpus(rng: &mut StdRng) -> (Vec<Vec<String>>, Vec<Vec<Vec<String>>>) {
    let n = rng.random_range(2..=6);
    let cands = (0..n).map(|_| tokens(rng, 8)).collect();
    let refs = (0..n)
        .map(|_| (0..rng.random_range(1..=3)).map(|_| tokens(rng, 8)).collect())
        .collect();
    (cands, refs)
}

pub fn example(id: &str, lang: LanguageCode, question: &str, answers: &[&str]) -> BenchmarkExample {
    BenchmarkExample {
        id: id.into(),
        image_id: format!("img-{id}"),
        lang,
        question: question.into(),
        answers: answers.iter().map(|s| s.to_string()).collect(),
        category: AnswerCategory::Other,
        collection_flag: false,
        english_question: None,
        extra: Default::default(),
    }
}

/// A small benchmark over `langs` with non-empty word answers.
pub fn random_benchmark(rng: &mut StdRng, langs: &[LanguageCode]) -> Benchmark {
    let mut examples = Vec::new();
    for (li, &lang) in langs.iter().enumerate() {
        for i in 0..rng.random_range(1..=6) {
            let k = rng.random_range(1..=3);
            let answers: Vec<String> = (0..k)
                .map(|_| {
                    let mut t = tokens(rng, 3);
                    if t.is_empty() {
                        t.push(VOCAB.choose(rng).unwrap().to_string());
                    }
                    t.join(" ")
                })
                .collect();
            let refs: Vec<&str> = answers.iter().map(String::as_str).collect();
            examples.push(example(&format!("{li}-{i}"), lang, "what is it?", &refs));
        }
    }
    Benchmark::new(examples).unwrap()
}

const NOUNS: [&str; 12] = [
    "cat", "dog", "bird", "horse", "car", "boat", "table", "chair", "tree", "flower", "man", "woman",
];
const PLACES: [&str; 6] = ["beach", "street", "table", "mountain", "snow", "house"];
const COLORS: [&str; 8] = ["white", "black", "red", "blue", "green", "yellow", "brown", "gray"];
const PREPS: [&str; 5] = ["on", "in", "near", "under", "behind"];
const NUMBERS: [&str; 4] = ["two", "three", "four", "five"];
const UNKNOWN: [&str; 4] = ["kite", "scarlet", "lighthouse", "turquoise"];

fn plural(noun: &str) -> String {
    match noun {
        "man" => "men".into(),
        "woman" => "women".into(),
        n => format!("{n}s"),
    }
}

/// English captions over the reference lexicons, with some out-of-lexicon
/// words so every filter gets exercised.
pub fn synthetic_captions(n: usize, seed: u64) -> Vec<Caption> {
    let mut rng = rng(seed);
    (0..n)
        .map(|i| {
            let mut words: Vec<String> = Vec::new();
            if rng.random_bool(0.5) {
                words.push(NUMBERS.choose(&mut rng).unwrap().to_string());
                if rng.random_bool(0.5) {
                    words.push(COLORS.choose(&mut rng).unwrap().to_string());
                }
                words.push(plural(NOUNS.choose(&mut rng).unwrap()));
            } else {
                words.push("a".into());
                if rng.random_bool(0.6) {
                    words.push(COLORS.choose(&mut rng).unwrap().to_string());
                }
                let noun = if rng.random_bool(0.1) {
                    UNKNOWN.choose(&mut rng).unwrap()
                } else {
                    NOUNS.choose(&mut rng).unwrap()
                };
                words.push(noun.to_string());
            }
            if rng.random_bool(0.8) {
                words.push(PREPS.choose(&mut rng).unwrap().to_string());
                words.push("the".into());
                words.push(PLACES.choose(&mut rng).unwrap().to_string());
            }
            // several captions per image, as in the caption corpora
            Caption::new(format!("img{:04}", i / 2), LanguageCode::En, words.join(" "))
        })
        .collect()
}

pub fn candidate(id: &str, lang: LanguageCode, question: &str, answer: &str, source: Source) -> CandidateQA {
    CandidateQA {
        id: id.into(),
        image_id: format!("img-{id}"),
        lang,
        english_question: if source == Source::Transvq2a {
            "what is it?".into()
        } else {
            String::new()
        },
        english_answer: if source == Source::Transvq2a {
            answer.into()
        } else {
            String::new()
        },
        question: question.into(),
        answer: answer.into(),
        source,
        filter_trace: vec![],
        caption: None,
        caption_lang: None,
        english_caption: None,
    }
}

/// (ro noun, feminine, en noun)
const RO_NOUNS: [(&str, bool, &str); 6] = [
    ("pisică", true, "cat"),
    ("mașină", true, "car"),
    ("barcă", true, "boat"),
    ("câine", false, "dog"),
    ("cal", false, "horse"),
    ("scaun", false, "chair"),
];
/// (masculine, feminine, en)
const RO_COLORS: [(&str, &str, &str); 6] = [
    ("alb", "albă", "white"),
    ("negru", "neagră", "black"),
    ("roșu", "roșie", "red"),
    ("verde", "verde", "green"),
    ("gri", "gri", "gray"),
    ("maro", "maro", "brown"),
];
const RO_PLACES: [(&str, &str); 4] = [
    ("plajă", "beach"),
    ("stradă", "street"),
    ("masă", "table"),
    ("zăpadă", "snow"),
];

/// Romanian captions with gender agreement and their English renderings.
/// Feminine nouns with inflecting colors fail the caption-answer filter.
pub fn romanian_captions(n: usize, seed: u64) -> Vec<Caption> {
    let mut rng = rng(seed);
    (0..n)
        .map(|i| {
            let (noun, fem, en_noun) = *RO_NOUNS.choose(&mut rng).unwrap();
            let (m, f, en_color) = *RO_COLORS.choose(&mut rng).unwrap();
            let (place, en_place) = *RO_PLACES.choose(&mut rng).unwrap();
            let (det, color) = if fem { ("o", f) } else { ("un", m) };
            let mut cap = Caption::new(
                format!("ro{:04}", i / 2),
                LanguageCode::Ro,
                format!("{det} {noun} {color} pe {place}"),
            );
            cap.english_text = Some(format!("a {en_color} {en_noun} on the {en_place}"));
            cap
        })
        .collect()
}
