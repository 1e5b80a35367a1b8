mod common;

use mvqa_core::adapt::{build_prompt, parse_prompt};
use mvqa_core::backends::Backends;
use mvqa_core::io::{load_benchmark, write_benchmark};
use mvqa_core::pipeline::{qgqa_consistency_filter, run_corpus, MatchRule, PipelineConfig};
use mvqa_core::textproc::{normalize, Lexicons};
use mvqa_core::{AnswerCategory, Benchmark, LanguageCode};
use proptest::prelude::*;

fn lang() -> impl Strategy<Value = LanguageCode> {
    prop::sample::select(LanguageCode::all().collect::<Vec<_>>())
}

fn benchmark_lang() -> impl Strategy<Value = LanguageCode> {
    prop::sample::select(LanguageCode::BENCHMARK.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn normalize_is_idempotent(s in "\\PC{0,24}", l in lang()) {
        let once = normalize(&s, l);
        prop_assert_eq!(normalize(&once, l), once);
    }

    #[test]
    fn tokens_are_nonempty_and_space_free(s in "\\PC{0,24}", l in lang()) {
        for t in Lexicons::bundled().normalized_tokens(&s, l).tokens {
            prop_assert!(!t.is_empty());
            prop_assert!(!t.chars().any(char::is_whitespace));
        }
    }

    #[test]
    fn caption_subruns_are_contained(words in prop::collection::vec("[a-z]{1,6}", 1..8), start in 0usize..8, len in 1usize..4) {
        let start = start % words.len();
        let end = (start + len).min(words.len());
        let caption = words.join(" ");
        let answer = words[start..end].join(" ").to_uppercase();
        prop_assert!(Lexicons::bundled().answer_in_caption(&answer, &caption, LanguageCode::En));
    }

    #[test]
    fn chinese_subruns_are_contained(chars in prop::collection::vec(prop::sample::select(vec!['猫', '狗', '白', '红', '车', '在']), 1..8), start in 0usize..8) {
        let caption: String = chars.iter().collect();
        let start = start % chars.len();
        let answer: String = chars[start..].iter().collect();
        prop_assert!(Lexicons::bundled().answer_in_caption(&answer, &caption, LanguageCode::Zh));
    }

    #[test]
    fn prompt_round_trip(l in lang(), q in "\\PC{0,30}") {
        let p = build_prompt(l, &q);
        prop_assert_eq!(parse_prompt(&p), Some((l, q.as_str())));
    }

    #[test]
    fn benchmark_file_round_trip(seed in any::<u64>(), l1 in benchmark_lang(), l2 in benchmark_lang()) {
        let mut rng = common::rng(seed);
        let bench = common::random_benchmark(&mut rng, &[l1, l2]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.jsonl");
        write_benchmark(&bench, &path).unwrap();
        prop_assert_eq!(load_benchmark(&path).unwrap(), bench);
    }

    #[test]
    fn template_pairs_are_extractive_and_self_consistent(seed in 0u64..10_000) {
        let b = Backends::reference();
        let lex = b.lexicons().clone();
        for cap in common::synthetic_captions(4, seed) {
            let out = b.qg.generate_qa(&cap.text).unwrap();
            for (q, a) in &out.pairs {
                let boolean = lex.answer_category(a, LanguageCode::En) == AnswerCategory::Boolean;
                prop_assert!(boolean || lex.answer_in_caption(a, &cap.text, LanguageCode::En), "{a} not in {}", cap.text);
                let echoed = b.qa.answer_from_context(q, &cap.text).unwrap();
                prop_assert!(MatchRule::NormalizedExact.accepts(&echoed, a, &lex), "{q} -> {echoed} != {a}");
            }
            let cands = mvqa_core::pipeline::transvq2a(&cap, &PipelineConfig::new(LanguageCode::En, b.clone())).unwrap();
            let (_, rejected) = qgqa_consistency_filter(cands, b.qa.as_ref(), MatchRule::NormalizedExact, &lex);
            prop_assert!(rejected.is_empty());
        }
    }

    #[test]
    fn every_candidate_lands_once(seed in any::<u64>(), target in benchmark_lang(), directqg in any::<bool>()) {
        let captions = common::synthetic_captions(24, seed);
        let mut cfg = PipelineConfig::new(target, Backends::reference());
        if directqg {
            cfg = cfg.with_default_directqg();
        }
        let run = run_corpus(&captions, &cfg).unwrap();
        for c in &run.passed {
            prop_assert!(!c.is_rejected());
        }
        for c in &run.rejected {
            let rejects = c.filter_trace.iter().filter(|r| r.verdict == mvqa_core::Verdict::Reject).count();
            prop_assert_eq!(rejects, 1);
            prop_assert_eq!(c.filter_trace.last().unwrap().verdict, mvqa_core::Verdict::Reject);
        }
        let english = run.stats.stages[1].count_out;
        let direct = run.stats.stages.get(4).map_or(0, |s| s.count_out);
        prop_assert_eq!(run.passed.len() + run.rejected.len(), english + direct);
    }
}

#[test]
fn empty_benchmark_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.jsonl");
    write_benchmark(&Benchmark::default(), &path).unwrap();
    assert!(load_benchmark(&path).unwrap().is_empty());
}
