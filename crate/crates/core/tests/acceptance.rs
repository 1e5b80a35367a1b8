//! Acceptance suite: one PASS/FAIL line per primary criterion, exit status
//! 1 if any fails. Runs as a plain binary so the lines always print.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::{Arc, Barrier, Mutex};
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::Rng;

use mvqa_core::annotate::{
    AnnotateError, AnnotationItem, AnnotationQueue, Event, Flag, ItemState, Rating, TransitionContext,
};
use mvqa_core::backends::Backends;
use mvqa_core::eval::{cider_corpus, rouge_l_example, CiderVariant};
use mvqa_core::io::load_benchmark;
use mvqa_core::pipeline::{
    caption_answer_filter, render_stage_table, run_corpus, PipelineConfig, StageRecord, StageStats, TableFormat,
    FILTER_CAPTION_ANSWER,
};
use mvqa_core::stats::dataset_stats;
use mvqa_core::textproc::{classify_question, Lexicons, QuestionPrefix};
use mvqa_core::{Caption, LanguageCode, Source, Verdict};

use common::{candidate, cider_oracle, rouge_oracle, synthetic_captions, ORACLE_TOL};
use LanguageCode::*;

const CONSERVATION_CAPTIONS: usize = 1000;
const ROMANIAN_CAPTIONS: usize = 200;
const CONSERVATION_BUDGET: Duration = Duration::from_secs(10);
const BOOLEAN_CASES: usize = 500;
const ORACLE_CORPORA: usize = 50;
const ORACLE_BUDGET: Duration = Duration::from_secs(5);
const PROPERTY_CASES: usize = 200;
const CONCURRENT_WRITERS: usize = 100;
/// Published per-language MaXM v1 counts, in benchmark language order.
const MAXM_V1_COUNTS: [(LanguageCode, usize); 7] = [
    (En, 298),
    (Fr, 293),
    (Hi, 294),
    (Iw, 315),
    (Ro, 333),
    (Th, 302),
    (Zh, 307),
];
/// Per-language counts of `data/sample/benchmark.jsonl`.
const SAMPLE_COUNTS: [(LanguageCode, usize); 7] = [(En, 8), (Fr, 6), (Hi, 5), (Iw, 5), (Ro, 6), (Th, 5), (Zh, 5)];

type Outcome = Result<String, String>;
type Criterion = (u8, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn c1_conservation() -> Outcome {
    let mut captions = synthetic_captions(CONSERVATION_CAPTIONS - ROMANIAN_CAPTIONS, 1);
    captions.extend(common::romanian_captions(ROMANIAN_CAPTIONS, 1));
    let start = Instant::now();
    let mut generated = 0;
    let mut rejected = 0;
    for target in [Fr, Ro] {
        let cfg = PipelineConfig::new(target, Backends::reference()).with_default_directqg();
        let run = run_corpus(&captions, &cfg).map_err(|e| e.to_string())?;
        let english = run.stats.stages[1].count_out;
        let direct = run.stats.stages[4].count_out;
        ensure(run.passed.len() + run.rejected.len() == english + direct, || {
            format!(
                "{target}: {} + {} != {english} + {direct}",
                run.passed.len(),
                run.rejected.len()
            )
        })?;
        ensure(run.passed.iter().all(|c| !c.is_rejected()), || {
            "a passed candidate carries a reject".into()
        })?;
        for c in &run.rejected {
            let n = c.filter_trace.iter().filter(|r| r.verdict == Verdict::Reject).count();
            ensure(n == 1, || format!("{} has {n} rejecting filters", c.id))?;
        }
        generated += english + direct;
        rejected += run.rejected.len();
    }
    ensure(rejected > 0, || "corpus exercised no rejection".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed < CONSERVATION_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{generated} candidates, {rejected} rejected, {elapsed:.2?}"))
}

fn c2_identity_closure() -> Outcome {
    let captions = synthetic_captions(CONSERVATION_CAPTIONS, 2);
    let run = run_corpus(&captions, &PipelineConfig::new(En, Backends::reference())).map_err(|e| e.to_string())?;
    let by_caption_filter = run
        .rejected
        .iter()
        .filter(|c| c.rejection().is_some_and(|r| r.filter == FILTER_CAPTION_ANSWER))
        .count();
    ensure(by_caption_filter == 0, || {
        format!("{by_caption_filter} rejected by caption_answer")
    })?;
    Ok(format!(
        "{} candidates passed the caption-answer filter",
        run.passed.len()
    ))
}

fn c3_morphology() -> Outcome {
    let b = Backends::reference();
    let mut cap = Caption::new("img-ro", Ro, "o pisică albă pe masă");
    cap.english_text = Some("a white cat on the table".into());
    let run = run_corpus(std::slice::from_ref(&cap), &PipelineConfig::new(Ro, b.clone())).map_err(|e| e.to_string())?;
    let color = run
        .rejected
        .iter()
        .find(|c| c.english_answer == "white")
        .ok_or("no rejected color candidate")?;
    ensure(color.answer == "alb", || {
        format!("translated answer {:?}", color.answer)
    })?;
    ensure(color.rejection().unwrap().filter == FILTER_CAPTION_ANSWER, || {
        "wrong filter".into()
    })?;
    let mut fixed = candidate("ro-fixed", Ro, "ce culoare are pisica?", "albă", Source::Transvq2a);
    fixed.english_answer = "white".into();
    let (passed, _) = caption_answer_filter(vec![fixed], &cap, b.translator.as_ref(), b.lexicons());
    ensure(passed.len() == 1, || "albă rejected".into())?;
    Ok("\"alb\" rejected against \"albă\", \"albă\" passes".into())
}

fn boolean_forms(lang: LanguageCode) -> Vec<String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("assets/lexicons/{lang}/boolean.txt"));
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split('\t').next().unwrap().to_string())
        .collect()
}

fn c4_boolean_bypass() -> Outcome {
    let b = Backends::reference();
    let mut rng = common::rng(4);
    let words = ["cat", "dog", "mat", "tree", "car", "sky", "beach"];
    for i in 0..BOOLEAN_CASES {
        let lang = *LanguageCode::BENCHMARK.choose(&mut rng).unwrap();
        let cap_lang = *LanguageCode::BENCHMARK.choose(&mut rng).unwrap();
        let forms = boolean_forms(lang);
        let mut answer = forms.choose(&mut rng).unwrap().clone();
        if rng.random_bool(0.3) && lang.has_letter_case() {
            answer = answer.to_uppercase();
        }
        let text: Vec<&str> = (0..rng.random_range(1..6))
            .map(|_| *words.choose(&mut rng).unwrap())
            .collect();
        let cap = Caption::new(format!("img{i}"), cap_lang, text.join(" "));
        let c = candidate(&format!("b{i}"), lang, "q?", &answer, Source::Transvq2a);
        let (passed, rejected) = caption_answer_filter(vec![c], &cap, b.translator.as_ref(), b.lexicons());
        ensure(rejected.is_empty() && passed.len() == 1, || {
            format!("{lang} {answer:?} rejected")
        })?;
        ensure(passed[0].filter_trace[0].detail == "boolean_bypass", || {
            format!("{answer:?} not bypassed")
        })?;
    }
    Ok(format!("{BOOLEAN_CASES} boolean candidates, none rejected"))
}

fn c5_table_arithmetic() -> Outcome {
    let a = StageRecord::filter("Validated English QAs", 373248, 264930).cell();
    let b = StageRecord::filter("Validated Multilingual QAs", 499900, 343621).cell();
    ensure(a == "264930 (71.0%)", || format!("got {a:?}"))?;
    ensure(b.ends_with("(68.7%)"), || format!("got {b:?}"))?;
    let table = render_stage_table(
        &[StageStats {
            lang: En,
            stages: vec![
                StageRecord::source("English QAs", 373248),
                StageRecord::filter("Validated English QAs", 373248, 264930),
            ],
        }],
        TableFormat::Text,
    );
    ensure(table.contains("264930 (71.0%)"), || table.clone())?;
    Ok(format!("{a:?}, {b:?}"))
}

fn c6_metric_oracles() -> Outcome {
    let mut rng = common::rng(6);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..ORACLE_CORPORA {
        let (c, r) = common::random_corpus(&mut rng);
        for (variant, d) in [(CiderVariant::Plain, false), (CiderVariant::D, true)] {
            let got = cider_corpus(&c, &r, variant).unwrap();
            worst = worst.max((got - cider_oracle(&c, &r, d)).abs());
        }
        for (ci, ri) in c.iter().zip(&r) {
            worst = worst.max((rouge_l_example(ci, ri) - rouge_oracle(ci, ri)).abs());
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= ORACLE_TOL, || format!("max deviation {worst:e}"))?;
    ensure(elapsed < ORACLE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{ORACLE_CORPORA} corpora, max deviation {worst:.1e}, {elapsed:.2?}"
    ))
}

fn c7_metric_invariants() -> Outcome {
    use mvqa_core::eval::{evaluate, EvalOptions, PredictionSet};
    let mut rng = common::rng(7);
    for case in 0..PROPERTY_CASES {
        let bench = common::random_benchmark(&mut rng, &[En, Fr]);
        let mut preds = PredictionSet::new("m");
        let mut oracle = PredictionSet::new("self");
        for e in bench.examples() {
            let (t, _) = common::random_corpus(&mut rng);
            preds.insert(e.id.clone(), t[0].join(" "));
            oracle.insert(e.id.clone(), e.primary_answer());
        }
        let res = evaluate(&preds, &bench, EvalOptions::default());
        for s in res.languages.values() {
            ensure(
                (0.0..=1.0).contains(&s.accuracy) && (0.0..=1.0).contains(&s.rouge_l),
                || format!("case {case}: {s:?}"),
            )?;
            if let Some(c) = s.cider {
                ensure((0.0..=10.0).contains(&c), || format!("case {case}: cider {c}"))?;
            }
        }
        let mut shuffled = bench.examples().to_vec();
        for e in &mut shuffled {
            e.answers.reverse();
            e.answers.rotate_left(1);
        }
        let shuffled = mvqa_core::Benchmark::new(shuffled).unwrap();
        let again = evaluate(&preds, &shuffled, EvalOptions::default());
        ensure(again.languages == res.languages, || {
            format!("case {case}: permutation changed scores")
        })?;
        let own = evaluate(&oracle, &bench, EvalOptions::default());
        for s in own.languages.values() {
            ensure(s.accuracy == 1.0 && s.rouge_l == 1.0, || {
                format!("case {case}: self-eval {s:?}")
            })?;
        }
    }
    Ok(format!("{PROPERTY_CASES} cases"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Expect {
    Next(ItemState),
    Validation,
    Invalid,
}

fn event_cases() -> Vec<(&'static str, Event)> {
    let expand = Event::Expand {
        annotator: "fresh".into(),
        answers: vec!["kitten".into()],
    };
    vec![
        ("rate_question(correct)", Event::RateQuestion(Rating::Correct)),
        ("rate_question(almost)", Event::RateQuestion(Rating::AlmostCorrect)),
        ("rate_question(incorrect)", Event::RateQuestion(Rating::Incorrect)),
        ("rewrite(text)", Event::Rewrite("what sits on the mat?".into())),
        ("rewrite(empty)", Event::Rewrite(" ".into())),
        ("rate_answer(correct)", Event::RateAnswer(Rating::Correct)),
        ("rate_answer(almost)", Event::RateAnswer(Rating::AlmostCorrect)),
        ("rate_answer(incorrect)", Event::RateAnswer(Rating::Incorrect)),
        ("correct(text)", Event::Correct("kitten".into())),
        ("correct(empty)", Event::Correct(String::new())),
        ("expand", expand),
        ("flag({})", Event::Flag(BTreeSet::new())),
        ("flag({collection})", Event::Flag([Flag::Collection].into())),
        ("flag({ambiguous})", Event::Flag([Flag::Ambiguous].into())),
        ("flag({rai_sensitive})", Event::Flag([Flag::RaiSensitive].into())),
    ]
}

/// The transition table written out case by case, for an item whose
/// answer is of category `other` and a quorum of 2 with no submissions yet.
fn expected(state: ItemState, case: &str) -> Expect {
    use Expect::*;
    use ItemState::*;
    match (state, case) {
        (PendingQuestion, "rate_question(correct)") => Next(PendingAnswer),
        (PendingQuestion, "rate_question(almost)") => Next(PendingRewrite),
        (PendingQuestion, "rate_question(incorrect)") => Next(Discarded),
        (PendingRewrite, "rewrite(text)") => Next(PendingAnswer),
        (PendingRewrite, "rewrite(empty)") => Validation,
        (PendingAnswer, "rate_answer(correct)") => Next(PendingExpansion),
        (PendingAnswer, "rate_answer(almost)") => Next(PendingCorrection),
        (PendingAnswer, "rate_answer(incorrect)") => Next(PendingCorrection),
        (PendingCorrection, "correct(text)") => Next(PendingExpansion),
        (PendingCorrection, "correct(empty)") => Validation,
        (PendingExpansion, "expand") => Next(PendingExpansion),
        (FlagReview, "flag({})") => Next(Done),
        (FlagReview, "flag({collection})") => Next(Done),
        (FlagReview, "flag({ambiguous})") => Next(Discarded),
        (FlagReview, "flag({rai_sensitive})") => Next(Discarded),
        _ => Invalid,
    }
}

fn c8_state_machine() -> Outcome {
    let lex = Lexicons::bundled();
    let ctx = TransitionContext {
        quorum: 2,
        lexicons: lex,
        actor: Some("ann"),
    };
    let mut pairs = 0;
    for state in ItemState::ALL {
        for (name, event) in event_cases() {
            let mut item = AnnotationItem::new(candidate("sm", En, "what is on the mat?", "cat", Source::Transvq2a));
            item.state = state;
            let before = item.clone();
            let got = match item.apply(event, ctx) {
                Ok(s) => Expect::Next(s),
                Err(AnnotateError::Validation(_)) => Expect::Validation,
                Err(AnnotateError::InvalidTransition { .. }) => Expect::Invalid,
                Err(e) => return Err(format!("{state} x {name}: unexpected {e}")),
            };
            let want = expected(state, name);
            ensure(got == want, || format!("{state} x {name}: got {got:?}, want {want:?}"))?;
            match got {
                Expect::Next(s) => ensure(item.state == s && item.version == before.version + 1, || {
                    format!("{state} x {name}: bookkeeping")
                })?,
                _ => ensure(item == before, || {
                    format!("{state} x {name}: rejected event mutated the item")
                })?,
            }
            pairs += 1;
        }
    }

    // standardized answers skip expansion
    let mut boolean = AnnotationItem::new(candidate("sb", En, "is there a cat?", "yes", Source::Transvq2a));
    boolean.state = ItemState::PendingAnswer;
    ensure(
        boolean.apply(Event::RateAnswer(Rating::Correct), ctx) == Ok(ItemState::FlagReview),
        || "boolean did not skip expansion".into(),
    )?;

    // quorum at 2
    let mut q = AnnotationQueue::new();
    q.enqueue([candidate("qa", En, "what is on the mat?", "cat", Source::Transvq2a)])
        .unwrap();
    q.submit_question_rating("qa", 0, None, Rating::Correct, None).unwrap();
    q.submit_answer_rating("qa", 1, None, Rating::Correct, None).unwrap();
    let first = q.submit_expansion("qa", 2, "a1", &["kitten".into()]).unwrap();
    ensure(first.state == ItemState::PendingExpansion, || {
        "first submitter reached quorum".into()
    })?;
    let dup = q.submit_expansion("qa", 3, "a1", &["tabby".into()]);
    ensure(matches!(dup, Err(AnnotateError::Validation(_))), || {
        "duplicate submitter accepted".into()
    })?;
    let second = q.submit_expansion("qa", 3, "a2", &[]).unwrap();
    ensure(second.state == ItemState::FlagReview, || {
        "second submitter did not reach quorum".into()
    })?;

    let walks = discard_soundness()?;
    let (conflicts, stale) = concurrent_writers()?;
    Ok(format!(
        "{pairs} (state, event) pairs, {walks} random walks sound, {CONCURRENT_WRITERS} writers: 0 lost updates, {conflicts} retried conflicts, {stale} stale writes rejected"
    ))
}

fn discard_soundness() -> Result<usize, String> {
    let mut rng = common::rng(8);
    let mut q = AnnotationQueue::new();
    let n = 300;
    let answers = ["cat", "yes", "two", "white", "a red car"];
    q.enqueue((0..n).map(|i| {
        candidate(
            &format!("w{i}"),
            En,
            "what is on the mat?",
            answers[i % answers.len()],
            Source::Transvq2a,
        )
    }))
    .unwrap();
    for _ in 0..4000 {
        let id = format!("w{}", rng.random_range(0..n));
        let item = q.get(&id).unwrap().clone();
        let v = if rng.random_bool(0.1) {
            item.version.wrapping_sub(1)
        } else {
            item.version
        };
        let rating = *Rating::ALL.choose(&mut rng).unwrap();
        let text = if rng.random_bool(0.8) {
            Some("better text")
        } else {
            None
        };
        let _ = match rng.random_range(0..4) {
            0 => q.submit_question_rating(&id, v, None, rating, text.filter(|_| rating == Rating::AlmostCorrect)),
            1 => q.submit_answer_rating(&id, v, None, rating, text.filter(|_| rating != Rating::Correct)),
            2 => q.submit_expansion(&id, v, &format!("a{}", rng.random_range(0..3)), &["feline".to_string()]),
            _ => {
                let all = [Flag::Ambiguous, Flag::RaiSensitive, Flag::Collection];
                let flags: BTreeSet<Flag> = all.into_iter().filter(|_| rng.random_bool(0.25)).collect();
                q.flag_item(&id, v, None, flags)
            }
        };
    }
    let export = q.export();
    for ex in export.examples() {
        let it = q.get(&ex.id).unwrap();
        ensure(it.question_rating != Some(Rating::Incorrect), || {
            format!("{}: incorrect question exported", ex.id)
        })?;
        ensure(
            !it.flags.contains(&Flag::Ambiguous) && !it.flags.contains(&Flag::RaiSensitive),
            || format!("{}: filtered flag exported", ex.id),
        )?;
        ensure(
            ex.question == it.candidate.question || it.question_rating == Some(Rating::AlmostCorrect),
            || format!("{}: rewrite without almost_correct", ex.id),
        )?;
        if ex.category == mvqa_core::AnswerCategory::Other {
            ensure(it.expansions.len() >= q.quorum(), || {
                format!("{}: exported below quorum", ex.id)
            })?;
        }
        ensure(ex.collection_flag == it.flags.contains(&Flag::Collection), || {
            format!("{}: collection flag lost", ex.id)
        })?;
    }
    for it in q.items() {
        let discard_expected = it.question_rating == Some(Rating::Incorrect) || it.flags.iter().any(|f| f.discards());
        ensure((it.state == ItemState::Discarded) == discard_expected, || {
            format!("{}: discard state mismatch", it.id())
        })?;
    }
    ensure(!export.is_empty(), || "random walk exported nothing".into())?;
    Ok(n)
}

/// Every writer retries on conflict until its expansion lands; afterwards a
/// burst of writes sharing one version must yield exactly one winner.
fn concurrent_writers() -> Result<(usize, usize), String> {
    let queue = Arc::new(Mutex::new(AnnotationQueue::new().with_quorum(CONCURRENT_WRITERS + 1)));
    {
        let mut q = queue.lock().unwrap();
        q.enqueue([candidate("hot", En, "what is on the mat?", "cat", Source::Transvq2a)])
            .unwrap();
        q.submit_question_rating("hot", 0, None, Rating::Correct, None).unwrap();
        q.submit_answer_rating("hot", 1, None, Rating::Correct, None).unwrap();
    }
    let barrier = Arc::new(Barrier::new(CONCURRENT_WRITERS));
    let handles: Vec<_> = (0..CONCURRENT_WRITERS)
        .map(|w| {
            let queue = queue.clone();
            let barrier = barrier.clone();
            std::thread::spawn(move || {
                barrier.wait();
                let mut conflicts = 0;
                loop {
                    let v = queue.lock().unwrap().get("hot").unwrap().version;
                    std::thread::yield_now();
                    match queue
                        .lock()
                        .unwrap()
                        .submit_expansion("hot", v, &format!("w{w}"), &[format!("answer {w}")])
                    {
                        Ok(_) => return Ok(conflicts),
                        Err(AnnotateError::Conflict { .. }) => conflicts += 1,
                        Err(e) => return Err(e.to_string()),
                    }
                }
            })
        })
        .collect();
    let mut conflicts = 0;
    for h in handles {
        conflicts += h.join().map_err(|_| "writer panicked".to_string())??;
    }
    let (version, submitted) = {
        let q = queue.lock().unwrap();
        let it = q.get("hot").unwrap();
        (it.version, it.expansions.len())
    };
    ensure(submitted == CONCURRENT_WRITERS, || {
        format!("{submitted} of {CONCURRENT_WRITERS} expansions stored")
    })?;
    ensure(version == 2 + CONCURRENT_WRITERS as u64, || {
        format!("version {version}")
    })?;

    let barrier = Arc::new(Barrier::new(CONCURRENT_WRITERS));
    let handles: Vec<_> = (0..CONCURRENT_WRITERS)
        .map(|w| {
            let queue = queue.clone();
            let barrier = barrier.clone();
            std::thread::spawn(move || {
                barrier.wait();
                queue
                    .lock()
                    .unwrap()
                    .submit_expansion("hot", version, &format!("late{w}"), &[])
                    .is_ok()
            })
        })
        .collect();
    let winners = handles
        .into_iter()
        .filter(|_| true)
        .map(|h| h.join().unwrap())
        .filter(|ok| *ok)
        .count();
    ensure(winners == 1, || format!("{winners} writes accepted at one version"))?;
    Ok((conflicts, CONCURRENT_WRITERS - winners))
}

fn c9_determinism() -> Outcome {
    let captions = synthetic_captions(CONSERVATION_CAPTIONS, 9);
    let render = |parallelism: usize| -> Result<String, String> {
        let mut cfg = PipelineConfig::new(Fr, Backends::reference()).with_default_directqg();
        cfg.parallelism = parallelism;
        let run = run_corpus(&captions, &cfg).map_err(|e| e.to_string())?;
        Ok(format!(
            "{}\n{}\n{}",
            mvqa_core::io::to_jsonl(&run.passed),
            mvqa_core::io::to_jsonl(&run.rejected),
            serde_json::to_string(&run.report()).unwrap()
        ))
    };
    let one = render(1)?;
    let eight = render(8)?;
    ensure(one == eight, || "outputs differ".into())?;
    Ok(format!("{} bytes identical", one.len()))
}

fn c10_benchmark_loader() -> Outcome {
    let sample = load_benchmark(&repo_root().join("data/sample/benchmark.jsonl")).map_err(|e| e.to_string())?;
    let stats = dataset_stats(&sample);
    for (lang, n) in SAMPLE_COUNTS {
        let got = stats.languages.get(&lang).map_or(0, |l| l.count);
        ensure(got == n, || format!("sample {lang}: {got} != {n}"))?;
    }
    let Ok(dir) = std::env::var("MVQA_MAXM_DIR") else {
        return Ok(format!(
            "bundled sample counts match ({} examples); MaXM v1 not supplied, set MVQA_MAXM_DIR to check {:?}",
            sample.len(),
            MAXM_V1_COUNTS.map(|(_, n)| n)
        ));
    };
    let mut examples = Vec::new();
    for entry in std::fs::read_dir(&dir).map_err(|e| format!("{dir}: {e}"))? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.extension().is_some_and(|e| e == "jsonl") {
            examples.extend(load_benchmark(&path).map_err(|e| e.to_string())?.into_examples());
        }
    }
    let maxm = mvqa_core::Benchmark::new(examples).map_err(|e| e.to_string())?;
    let stats = dataset_stats(&maxm);
    for (lang, n) in MAXM_V1_COUNTS {
        let got = stats.languages.get(&lang).map_or(0, |l| l.count);
        ensure(got == n, || format!("MaXM {lang}: {got} != {n}"))?;
    }
    Ok(format!(
        "bundled sample and MaXM v1 ({} examples) counts match",
        maxm.len()
    ))
}

fn c11_prefixes() -> Outcome {
    use QuestionPrefix::*;
    let cases: [(&str, QuestionPrefix); 32] = [
        ("Is the dog asleep?", Is),
        ("is there snow on the roof", Is),
        ("What is on the table?", WhatIs),
        ("What is the man holding?", WhatIs),
        ("How many dogs are there?", HowMany),
        ("how many people are standing?", HowMany),
        ("Where is the cat sitting?", Where),
        ("What kind of bird is this?", WhatKind),
        ("What are the children doing?", WhatAre),
        ("Who is riding the horse?", Who),
        ("Are the lights on?", Are),
        ("What color is the roof?", WhatColor),
        ("what color are the flowers?", WhatColor),
        ("A dog or a cat?", A),
        ("What type of vehicle is shown?", WhatType),
        ("What was the woman carrying?", WhatWas),
        ("Do the trees have leaves?", Do),
        ("In which room is the sofa?", In),
        ("Besides the dog, what animal is there?", Besides),
        ("Does the boat have a sail?", Does),
        ("Which way is the car facing?", Other),
        ("Why is the man smiling?", Other),
        ("What?", Other),
        ("Isn't it raining?", Other),
        ("WHAT COLOR IS THE SKY?", WhatColor),
        ("  where   are the keys ?", Where),
        ("What is the color of the car?", WhatIs),
        ("What kinds of food are there?", Other),
        ("Does it snow here?", Does),
        ("Inside the house, who is there?", Other),
        ("who's there?", Other),
        ("In front of the car, what is there?", In),
    ];
    for (q, want) in cases {
        let got = classify_question(q);
        ensure(got == want, || format!("{q:?}: got {got}, want {want}"))?;
    }
    let covered: BTreeSet<_> = cases.iter().map(|(_, p)| *p).collect();
    ensure(covered.len() == QuestionPrefix::ALL.len(), || {
        format!("covers {} prefixes", covered.len())
    })?;
    Ok(format!("{} questions, {} prefixes", cases.len(), covered.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "pipeline conservation", c1_conservation),
        (2, "identity-language closure", c2_identity_closure),
        (3, "morphology rejection", c3_morphology),
        (4, "boolean bypass", c4_boolean_bypass),
        (5, "stage-table arithmetic", c5_table_arithmetic),
        (6, "metric oracle equivalence", c6_metric_oracles),
        (7, "metric invariants", c7_metric_invariants),
        (8, "annotation state machine", c8_state_machine),
        (9, "determinism under parallelism", c9_determinism),
        (10, "benchmark loader", c10_benchmark_loader),
        (11, "question-prefix classifier", c11_prefixes),
    ];
    let mut failed = 0;
    for (n, name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {n:>2} {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
