use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;

#[derive(Debug, Parser)]
#[command(
    name = "mvqa",
    version,
    about = "Multilingual VQA data generation, annotation and evaluation"
)]
struct Cli {
    /// TOML file overlaid under the flags.
    #[arg(long, global = true, env = "MVQA_CONFIG")]
    config: Option<PathBuf>,
    /// Seed for stochastic backends. The reference backends are deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Repeat for more log output on stderr.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the generation pipeline over a caption file.
    Generate(GenerateArgs),
    /// Print stage statistics of runs, composition of a benchmark, or annotation tallies.
    Stats(StatsArgs),
    /// Annotation workflow.
    Annotate {
        #[command(subcommand)]
        command: AnnotateCommand,
    },
    /// Translate-Train and Translate-Test transforms.
    Adapt(AdaptArgs),
    /// Score prediction files against a benchmark.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub captions: PathBuf,
    #[arg(long)]
    pub target_lang: Option<String>,
    /// Backend bindings TOML; all reference backends when absent.
    #[arg(long)]
    pub backends: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Also run DirectQG with the target language's yes, no and none answers.
    #[arg(long)]
    pub directqg: bool,
    /// `normalized_exact` or `token_f1:<t>`.
    #[arg(long)]
    pub match_rule: Option<String>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct StatsSource {
    /// Generation output directory; repeat for one column per run.
    #[arg(long)]
    pub run: Vec<PathBuf>,
    #[arg(long)]
    pub benchmark: Option<PathBuf>,
    /// Annotation queue directory.
    #[arg(long)]
    pub queue: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub source: StatsSource,
    #[arg(long, value_enum, default_value_t = StatsFormat::Text)]
    pub format: StatsFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatsFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum AnnotateCommand {
    /// Serve the annotation HTTP API until interrupted.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Directory holding the event log.
    #[arg(long)]
    pub queue: Option<PathBuf>,
    #[arg(long)]
    pub host: Option<String>,
    /// 0 picks a free port.
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long)]
    pub quorum: Option<usize>,
    #[arg(long)]
    pub lease_ttl_secs: Option<i64>,
    /// Candidate file to enqueue before serving.
    #[arg(long)]
    pub candidates: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AdaptMode {
    TranslateTrain,
    TranslateTest,
}

#[derive(Debug, Args)]
pub struct AdaptArgs {
    #[arg(long, value_enum)]
    pub mode: AdaptMode,
    /// translate-train: English training pairs.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// translate-train: comma-separated target languages.
    #[arg(long, value_delimiter = ',')]
    pub langs: Vec<String>,
    /// translate-train: keep answers in English.
    #[arg(long)]
    pub english_answers: bool,
    /// translate-test: benchmark to answer.
    #[arg(long)]
    pub benchmark: Option<PathBuf>,
    /// translate-test: captions supplying the answering context, by image id.
    #[arg(long)]
    pub captions: Option<PathBuf>,
    #[arg(long)]
    pub backends: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub benchmark: PathBuf,
    /// Repeat for one row block per model; the model name is the file stem.
    #[arg(long, required = true)]
    pub predictions: Vec<PathBuf>,
    /// Comma-separated subset of em, cider, rouge.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Vec<String>,
    /// text, csv or markdown.
    #[arg(long)]
    pub format: Option<String>,
    /// plain or d.
    #[arg(long)]
    pub cider_variant: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    // usage errors share exit 1 with config errors; 2 is reserved for unreachable backends
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = commands::load_file_config(cli.config.as_deref()).and_then(|file| {
        if let Some(seed) = cli.seed.or(file.seed) {
            log::debug!("seed {seed}");
        }
        match cli.command {
            Command::Generate(args) => commands::generate(args, &file.generate),
            Command::Stats(args) => commands::stats(args),
            Command::Annotate {
                command: AnnotateCommand::Serve(args),
            } => commands::serve(args, &file.annotate),
            Command::Adapt(args) => commands::adapt(args, &file.adapt),
            Command::Evaluate(args) => commands::evaluate(args, &file.evaluate),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = commands::exit_code(&e);
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::from(code)
        }
    }
}
