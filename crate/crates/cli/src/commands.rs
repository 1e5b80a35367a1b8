use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use anyhow::{bail, Context, Result};

use mvqa_core::adapt::{translate_test, translate_train, SourceExample, TrainOptions};
use mvqa_core::annotate::service::serve as serve_api;
use mvqa_core::annotate::AnnotationQueue;
use mvqa_core::backends::{BackendError, Backends, BackendsConfig};
use mvqa_core::eval::{
    evaluate as run_eval, render_report, CiderVariant, EvalOptions, Metric, PredictionSet, ReportFormat,
};
use mvqa_core::io::{load_benchmark, load_candidates, load_captions, parse_jsonl, write_jsonl};
use mvqa_core::pipeline::{render_stage_table, run_corpus, MatchRule, PipelineConfig, RunReport, TableFormat};
use mvqa_core::stats::dataset_stats;
use mvqa_core::{CoreError, LanguageCode};

use crate::config::{AdaptSection, AnnotateSection, EvaluateSection, FileConfig, GenerateSection};
use crate::{AdaptArgs, AdaptMode, EvaluateArgs, GenerateArgs, ServeArgs, StatsArgs, StatsFormat};

const EXIT_CONFIG: u8 = 1;
const EXIT_UNREACHABLE: u8 = 2;
const EVENT_LOG: &str = "events.jsonl";

/// A remote binding failed its connect check.
#[derive(Debug, thiserror::Error)]
#[error("backend unreachable: {0}")]
pub struct Unreachable(BackendError);

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.chain().any(|c| c.is::<Unreachable>()) {
        EXIT_UNREACHABLE
    } else {
        EXIT_CONFIG
    }
}

pub fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    path.map_or_else(|| Ok(FileConfig::default()), FileConfig::load)
}

fn parse_lang(s: &str) -> Result<LanguageCode> {
    s.trim().parse().map_err(|e: CoreError| anyhow::anyhow!("{e}"))
}

fn backends(path: Option<&Path>) -> Result<Backends> {
    let cfg = match path {
        Some(p) => BackendsConfig::load(p)?,
        None => BackendsConfig::default(),
    };
    let b = Backends::from_config(&cfg)?;
    b.health_check().map_err(Unreachable)?;
    Ok(b)
}

pub fn generate(args: GenerateArgs, file: &GenerateSection) -> Result<()> {
    let target = args
        .target_lang
        .as_deref()
        .or(file.target_lang.as_deref())
        .context("--target-lang is required")?;
    let target = parse_lang(target)?;
    let captions = load_captions(&args.captions)?;
    let match_rule: MatchRule = match args.match_rule.as_deref().or(file.match_rule.as_deref()) {
        Some(r) => r.parse()?,
        None => MatchRule::default(),
    };
    if args.out.is_file() {
        bail!("--out {} is a file", args.out.display());
    }
    let backends = backends(args.backends.as_deref().or(file.backends.as_deref()))?;
    let mut cfg = PipelineConfig::new(target, backends);
    if args.directqg || file.directqg.unwrap_or(false) {
        cfg = cfg.with_default_directqg();
    }
    cfg.qgqa_match_rule = match_rule;
    cfg.parallelism = args.parallelism.or(file.parallelism).unwrap_or(1);
    cfg.validate()?;

    let run = run_corpus(&captions, &cfg)?;
    for f in &run.failures {
        log::warn!(
            "caption {} ({}) at {}: {}",
            f.caption_index,
            f.image_id,
            f.stage,
            f.message
        );
    }
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_jsonl(&args.out.join("candidates.jsonl"), &run.passed)?;
    write_jsonl(&args.out.join("rejected.jsonl"), &run.rejected)?;
    let report = serde_json::to_string_pretty(&run.report())? + "\n";
    fs::write(args.out.join("run_report.json"), report).context("writing run_report.json")?;
    let counts = run.counts();
    eprintln!(
        "{} candidates: {} passed, {} rejected, {} caption failure(s)",
        counts.generated,
        counts.passed,
        counts.rejected,
        run.failures.len()
    );
    Ok(())
}

fn load_report(dir: &Path) -> Result<RunReport> {
    let path = dir.join("run_report.json");
    let text = fs::read_to_string(&path).with_context(|| path.display().to_string())?;
    serde_json::from_str(&text).with_context(|| path.display().to_string())
}

pub fn stats(args: StatsArgs) -> Result<()> {
    let src = args.source;
    let out = if !src.run.is_empty() {
        let columns = src
            .run
            .iter()
            .map(|d| load_report(d).map(|r| r.stats))
            .collect::<Result<Vec<_>>>()?;
        match args.format {
            StatsFormat::Text => render_stage_table(&columns, TableFormat::Text),
            StatsFormat::Csv => render_stage_table(&columns, TableFormat::Csv),
            StatsFormat::Json => serde_json::to_string_pretty(&columns)? + "\n",
        }
    } else if let Some(path) = src.benchmark {
        let report = dataset_stats(&load_benchmark(&path)?);
        match args.format {
            StatsFormat::Json => serde_json::to_string_pretty(&report)? + "\n",
            StatsFormat::Csv => bail!("csv is only available for --run"),
            StatsFormat::Text => report.render_text(),
        }
    } else if let Some(dir) = src.queue {
        let log = dir.join(EVENT_LOG);
        if !log.is_file() {
            bail!("{}: no event log", dir.display());
        }
        let stats = AnnotationQueue::open(&log)?.stats();
        match args.format {
            StatsFormat::Json => serde_json::to_string_pretty(&stats)? + "\n",
            StatsFormat::Csv => bail!("csv is only available for --run"),
            StatsFormat::Text => stats.render_text(),
        }
    } else {
        unreachable!("clap requires one source")
    };
    print!("{out}");
    Ok(())
}

pub fn serve(args: ServeArgs, file: &AnnotateSection) -> Result<()> {
    let dir = args.queue.or(file.queue.clone()).context("--queue is required")?;
    let quorum = args
        .quorum
        .or(file.quorum)
        .unwrap_or(mvqa_core::annotate::DEFAULT_QUORUM);
    if quorum == 0 {
        bail!("--quorum must be positive");
    }
    let ttl = args
        .lease_ttl_secs
        .or(file.lease_ttl_secs)
        .unwrap_or(mvqa_core::annotate::DEFAULT_LEASE_TTL_SECS);
    if ttl <= 0 {
        bail!("--lease-ttl-secs must be positive");
    }
    let host = args.host.or(file.host.clone()).unwrap_or_else(|| "127.0.0.1".into());
    let port = args.port.or(file.port).unwrap_or(8080);
    let candidates = args.candidates.as_deref().map(load_candidates).transpose()?;

    let rt = tokio::runtime::Runtime::new()?;
    let listener = rt
        .block_on(tokio::net::TcpListener::bind((host.as_str(), port)))
        .with_context(|| format!("binding {host}:{port}"))?;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut queue = AnnotationQueue::open(&dir.join(EVENT_LOG))?
        .with_quorum(quorum)
        .with_lease_ttl(chrono::Duration::seconds(ttl));
    if let Some(c) = candidates {
        let s = queue.enqueue(c)?;
        eprintln!(
            "enqueued {} ({} duplicate, {} rejected, {} directqg skipped)",
            s.added, s.duplicates, s.skipped_rejected, s.skipped_directqg
        );
    }
    let addr = listener.local_addr()?;
    println!("listening on http://{addr} ({} items, quorum {quorum})", queue.len());
    let queue = Arc::new(Mutex::new(queue));
    rt.block_on(serve_api(listener, queue, shutdown_signal()))?;
    eprintln!("event log flushed");
    Ok(())
}

async fn shutdown_signal() {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        let mut term = signal(SignalKind::terminate()).expect("SIGTERM handler");
        tokio::select! {
            _ = tokio::signal::ctrl_c() => {}
            _ = term.recv() => {}
        }
    }
    #[cfg(not(unix))]
    let _ = tokio::signal::ctrl_c().await;
}

fn load_train(path: &Path) -> Result<Vec<SourceExample>> {
    let body = fs::read_to_string(path).with_context(|| path.display().to_string())?;
    let (records, diags) = parse_jsonl::<SourceExample>(&body, |_| Ok(()));
    if !diags.is_empty() {
        return Err(CoreError::Schema(diags)).with_context(|| path.display().to_string());
    }
    Ok(records)
}

pub fn adapt(args: AdaptArgs, file: &AdaptSection) -> Result<()> {
    let backends_path = args.backends.as_deref().or(file.backends.as_deref());
    match args.mode {
        AdaptMode::TranslateTrain => {
            let train = args
                .train
                .as_deref()
                .context("--train is required for translate-train")?;
            let langs: Vec<String> = if args.langs.is_empty() {
                file.langs.clone().context("--langs is required for translate-train")?
            } else {
                args.langs
            };
            let langs = langs.iter().map(|l| parse_lang(l)).collect::<Result<Vec<_>>>()?;
            let examples = load_train(train)?;
            let b = backends(backends_path)?;
            let options = TrainOptions {
                translate_answers: !args.english_answers && file.translate_answers.unwrap_or(true),
            };
            let out = translate_train(&examples, &langs, b.translator.as_ref(), options);
            write_jsonl(&args.out, &out.examples)?;
            eprintln!(
                "{} prompted examples, {} skipped",
                out.examples.len(),
                out.skipped.len()
            );
        }
        AdaptMode::TranslateTest => {
            let bench = args
                .benchmark
                .as_deref()
                .context("--benchmark is required for translate-test")?;
            let captions = args
                .captions
                .as_deref()
                .context("--captions is required for translate-test")?;
            let bench = load_benchmark(bench)?;
            let captions = load_captions(captions)?;
            let b = backends(backends_path)?;
            let en = LanguageCode::En;
            let mut contexts: HashMap<&str, String> = HashMap::new();
            for c in &captions {
                if contexts.contains_key(c.image_id.as_str()) {
                    continue;
                }
                let text = match (&c.english_text, c.lang) {
                    (Some(t), _) => t.clone(),
                    (None, l) if l == en => c.text.clone(),
                    (None, l) => match b.translator.translate(&c.text, l, en) {
                        Ok(t) => t,
                        Err(e) => {
                            log::warn!("caption for {}: {e}", c.image_id);
                            continue;
                        }
                    },
                };
                contexts.insert(&c.image_id, text);
            }
            let mut records = Vec::with_capacity(bench.len());
            let mut failed = 0;
            for ex in bench.examples() {
                let context = contexts.get(ex.image_id.as_str()).map_or("", String::as_str);
                let answer = translate_test(&ex.question, ex.lang, b.translator.as_ref(), |q| {
                    b.qa.answer_from_context(q, context)
                })
                .unwrap_or_else(|e| {
                    log::warn!("example {}: {e}", ex.id);
                    failed += 1;
                    String::new()
                });
                records.push(mvqa_core::eval::PredictionRecord {
                    example_id: ex.id.clone(),
                    answer,
                });
            }
            write_jsonl(&args.out, &records)?;
            eprintln!(
                "{} predictions, {failed} answered empty after a backend error",
                records.len()
            );
        }
    }
    Ok(())
}

fn model_name(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "model".into(), |s| s.to_string_lossy().into_owned())
}

pub fn evaluate(args: EvaluateArgs, file: &EvaluateSection) -> Result<()> {
    let metric_names = if args.metrics.is_empty() {
        file.metrics.clone().unwrap_or_default()
    } else {
        args.metrics
    };
    let metrics: Vec<Metric> = if metric_names.is_empty() {
        Metric::ALL.to_vec()
    } else {
        metric_names.iter().map(|m| m.parse()).collect::<Result<_, _>>()?
    };
    let format: ReportFormat = args
        .format
        .as_deref()
        .or(file.format.as_deref())
        .unwrap_or("text")
        .parse()?;
    let cider_variant = match args.cider_variant.as_deref().or(file.cider_variant.as_deref()) {
        None | Some("plain") => CiderVariant::Plain,
        Some("d") | Some("cider-d") => CiderVariant::D,
        Some(other) => bail!("unknown CIDEr variant `{other}` (plain, d)"),
    };
    let bench = load_benchmark(&args.benchmark)?;
    let sets = args
        .predictions
        .iter()
        .map(|p| PredictionSet::load(p, model_name(p)))
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<_> = sets
        .iter()
        .map(|p| run_eval(p, &bench, EvalOptions { cider_variant }))
        .collect();
    for r in &results {
        for w in &r.warnings {
            eprintln!("warning: {}: {w}", r.model_name);
        }
    }
    let report = render_report(&results, &metrics, format);
    match args.out {
        Some(path) => write_report(&path, &report)?,
        None => print!("{report}"),
    }
    Ok(())
}

fn write_report(path: &PathBuf, report: &str) -> Result<()> {
    fs::write(path, report).with_context(|| format!("writing {}", path.display()))
}
