//! Deterministic workloads shared by the benches.

use mvqa_core::{Caption, LanguageCode};

const NOUNS: [&str; 8] = ["cat", "dog", "car", "boat", "horse", "bird", "chair", "tree"];
const COLORS: [&str; 6] = ["white", "black", "red", "blue", "green", "brown"];
const PLACES: [&str; 4] = ["beach", "street", "table", "snow"];
const NUMBERS: [&str; 4] = ["two", "three", "four", "five"];

/// English captions cycling through a fixed grammar; two per image.
pub fn captions(n: usize) -> Vec<Caption> {
    (0..n)
        .map(|i| {
            let noun = NOUNS[i % NOUNS.len()];
            let color = COLORS[(i / 3) % COLORS.len()];
            let place = PLACES[(i / 7) % PLACES.len()];
            let text = if i % 2 == 0 {
                format!("a {color} {noun} on the {place}")
            } else {
                format!("{} {noun}s near the {place}", NUMBERS[(i / 5) % NUMBERS.len()])
            };
            Caption::new(format!("img{:05}", i / 2), LanguageCode::En, text)
        })
        .collect()
}

/// `n` tokenized candidates, each with three references.
pub fn token_corpus(n: usize) -> (Vec<Vec<String>>, Vec<Vec<Vec<String>>>) {
    let sentence = |k: usize| -> Vec<String> {
        captions(1 + k % 64)
            .pop()
            .map(|c| c.text.split(' ').map(String::from).collect())
            .unwrap_or_default()
    };
    let cands = (0..n).map(sentence).collect();
    let refs = (0..n).map(|i| (1..=3).map(|r| sentence(i * 7 + r)).collect()).collect();
    (cands, refs)
}
