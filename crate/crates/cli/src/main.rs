use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ncai_core::dataset::{parse_jsonl, to_jsonl_string, ExternalScore, PredictionRecord, QaRecord};
use ncai_core::gateway::{
    run_qa_batch, BackendConfig, CannedBackend, CompletionBackend, GatewayError, HttpBackend, OracleBackend,
    Provider, DEFAULT_EXAMPLE_COUNT,
};
use ncai_core::metrics::{evaluate_run, MetricConfig, MetricReport};
use ncai_core::{answer_question, export_dot, parse_document, serialize_model, OpmModel, ParseMode};

#[derive(Parser)]
#[command(name = "ncai", version, about = "Question answering and evaluation over OPM models")]
struct Cli {
    /// Treat any parse or validation error as fatal.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate an OPL file and print element counts.
    Check {
        opl: PathBuf,
        /// Print the parsed model as JSON instead of counts.
        #[arg(long)]
        json: bool,
    },
    /// Print the processes that change OBJECT from FROM to TO, one per line.
    Query { opl: PathBuf, object: String, from: String, to: String },
    /// Answer a JSONL question file with the symbolic answerer.
    Answer {
        opl: PathBuf,
        questions: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Score predictions against references.
    Eval(EvalArgs),
    /// Render the model as Graphviz DOT.
    ExportDot {
        opl: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Answer questions through a completion backend.
    RunLlm(RunLlmArgs),
    /// Parse, serialize and re-parse an OPL file, checking the model survives.
    Roundtrip { opl: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct EvalArgs {
    /// Reference answers (JSONL with id, question, answer).
    refs: PathBuf,
    /// Predictions (JSONL with id, prediction).
    preds: PathBuf,
    /// OPL model used to extract elements for the transparency metrics.
    #[arg(long)]
    model: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Metric configuration (JSON); unspecified fields keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Strict-accuracy exponent.
    #[arg(long)]
    k: Option<f64>,
    /// External per-item scores (JSONL with id, bt, gpt).
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Second system's predictions, for per-metric significance tests.
    #[arg(long)]
    against: Option<PathBuf>,
    /// External scores for the --against predictions.
    #[arg(long, requires = "against")]
    against_scores: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Mock,
    MockOracle,
    Http,
}

#[derive(Args)]
struct RunLlmArgs {
    /// Knowledge text placed in the prompt (OPL or natural language).
    knowledge: PathBuf,
    /// Questions (JSONL with id, question).
    questions: PathBuf,
    /// Example question-answer pairs (JSONL with question, answer).
    #[arg(long)]
    examples: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_EXAMPLE_COUNT)]
    num_examples: usize,
    #[arg(long, value_enum, default_value = "mock")]
    backend: BackendKind,
    /// Canned answers for the mock backend (JSONL with question, answer).
    #[arg(long)]
    canned: Option<PathBuf>,
    /// OPL model for the mock-oracle backend; defaults to the knowledge file.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Request shape for the http backend: generic or openai.
    #[arg(long, default_value = "generic")]
    provider: String,
    /// Overrides NCAI_LLM_BASE_URL.
    #[arg(long)]
    endpoint: Option<String>,
    /// Overrides NCAI_LLM_MODEL.
    #[arg(long)]
    model_id: Option<String>,
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    #[arg(long, default_value_t = 3)]
    max_retries: u32,
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

/// Exit status 1: the input was read but is invalid or has no answer.
/// Exit status 2: the command could not run (bad usage, unreadable file).
enum Failure {
    Invalid(anyhow::Error),
    Usage(anyhow::Error),
}

type CmdResult = Result<(), Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Invalid(e.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(usage)
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, Failure> {
    parse_jsonl(&read(path)?).with_context(|| format!("malformed JSONL in {}", path.display())).map_err(usage)
}

fn emit(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())).map_err(usage),
        None => io::stdout().write_all(text.as_bytes()).context("cannot write to stdout").map_err(usage),
    }
}

fn mode(strict: bool) -> ParseMode {
    if strict {
        ParseMode::Strict
    } else {
        ParseMode::Lenient
    }
}

/// Parses an OPL file, printing diagnostics to stderr. Any error-level
/// diagnostic makes the model invalid.
fn load_model(path: &Path, strict: bool) -> Result<OpmModel, Failure> {
    let text = read(path)?;
    let (model, diagnostics) = parse_document(&text, mode(strict)).map_err(invalid)?;
    for d in &diagnostics {
        eprintln!("{}: {d}", path.display());
    }
    let errors = diagnostics.iter().filter(|d| d.is_error()).count();
    if errors > 0 {
        return Err(invalid(anyhow!("{} has {errors} error(s)", path.display())));
    }
    Ok(model)
}

fn cmd_check(opl: &Path, json: bool, strict: bool) -> CmdResult {
    let text = read(opl)?;
    let (model, diagnostics) = parse_document(&text, mode(strict)).map_err(invalid)?;
    for d in &diagnostics {
        eprintln!("{}: {d}", opl.display());
    }
    if json {
        emit(None, &(model.to_json() + "\n"))?;
    } else {
        println!(
            "objects: {}, processes: {}, states: {}, links: {}",
            model.objects.len(),
            model.processes.len(),
            model.state_count(),
            model.links.len()
        );
    }
    let errors = diagnostics.iter().filter(|d| d.is_error()).count();
    let warnings = diagnostics.len() - errors;
    eprintln!("{errors} error(s), {warnings} warning(s)");
    if errors > 0 {
        return Err(invalid(anyhow!("{} is not a valid model", opl.display())));
    }
    Ok(())
}

fn cmd_query(opl: &Path, object: &str, from: &str, to: &str, strict: bool) -> CmdResult {
    let model = load_model(opl, strict)?;
    let processes = ncai_core::processes_between(&model, object, from, to).map_err(invalid)?;
    let mut out = String::new();
    for p in processes {
        out.push_str(p.surface());
        out.push('\n');
    }
    emit(None, &out)
}

fn answer_all(model: &OpmModel, questions: &[QaRecord]) -> Vec<PredictionRecord> {
    questions
        .iter()
        .map(|q| match answer_question(model, &q.question) {
            Ok(a) => PredictionRecord::ok(q.id, a.text),
            Err(e) => PredictionRecord::failed(q.id, e),
        })
        .collect()
}

fn report_failures(preds: &[PredictionRecord]) {
    for p in preds {
        if let Some(e) = &p.error {
            eprintln!("item {}: {e}", p.id);
        }
    }
}

fn cmd_answer(opl: &Path, questions: &Path, out: Option<&Path>, strict: bool) -> CmdResult {
    let model = load_model(opl, strict)?;
    let questions: Vec<QaRecord> = read_jsonl(questions)?;
    let preds = answer_all(&model, &questions);
    report_failures(&preds);
    emit(out, &to_jsonl_string(&preds))
}

fn evaluate(
    preds: &Path,
    scores: Option<&Path>, refs: &[QaRecord], model: &OpmModel, config: &MetricConfig) -> Result<MetricReport, Failure> {
    let preds: Vec<PredictionRecord> = read_jsonl(preds)?;
    let mut report = evaluate_run(refs, &preds, model, config).map_err(invalid)?;
    if let Some(path) = scores {
        let scores: Vec<ExternalScore> = read_jsonl(path)?;
        report.attach_external(&scores).map_err(invalid)?;
    }
    Ok(report)
}

fn cmd_eval(args: &EvalArgs, strict: bool) -> CmdResult {
    let model = load_model(&args.model, strict)?;
    let refs: Vec<QaRecord> = read_jsonl(&args.refs)?;
    let mut config = match &args.config {
        Some(path) => serde_json::from_str::<MetricConfig>(&read(path)?)
            .with_context(|| format!("invalid metric configuration in {}", path.display()))
            .map_err(usage)?,
        None => MetricConfig::default(),
    };
    if let Some(k) = args.k {
        config.k = k;
    }
    let mut report = evaluate(&args.preds, args.scores.as_deref(), &refs, &model, &config)?;
    if let Some(other) = &args.against {
        let other = evaluate(other, args.against_scores.as_deref(), &refs, &model, &config)?;
        report.compare_with(&other).map_err(invalid)?;
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let body = match args.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv().map_err(invalid)?,
    };
    let summary = format!(
        "config: {}\n{}",
        serde_json::to_string(&report.config).expect("config serializes"),
        report.summary_table()
    );
    match &args.out {
        Some(path) => {
            emit(Some(path), &body)?;
            print!("{summary}");
        }
        None => {
            eprint!("{summary}");
            emit(None, &body)?;
        }
    }
    Ok(())
}

fn cmd_export_dot(opl: &Path, out: Option<&Path>, strict: bool) -> CmdResult {
    let model = load_model(opl, strict)?;
    emit(out, &export_dot(&model))
}

fn cmd_roundtrip(opl: &Path, strict: bool) -> CmdResult {
    let model = load_model(opl, strict)?;
    let text = serialize_model(&model).map_err(invalid)?;
    let (again, _) = parse_document(&text, ParseMode::Strict).map_err(invalid)?;
    if again.canonical() != model.canonical() {
        return Err(invalid(anyhow!("re-parsed model differs from the original")));
    }
    emit(None, &text)
}

fn cmd_run_llm(args: &RunLlmArgs, strict: bool) -> CmdResult {
    let knowledge = read(&args.knowledge)?;
    let questions: Vec<QaRecord> = read_jsonl(&args.questions)?;
    let examples: Vec<(String, String)> = match &args.examples {
        Some(path) => read_jsonl::<QaRecord>(path)?
            .into_iter()
            .take(args.num_examples)
            .map(|r| (r.question, r.answer))
            .collect(),
        None => Vec::new(),
    };
    let backend: Box<dyn CompletionBackend> = match args.backend {
        BackendKind::Mock => {
            let path = args.canned.as_deref().ok_or_else(|| usage(anyhow!("--backend mock needs --canned FILE")))?;
            Box::new(CannedBackend::new(read_jsonl(path)?).map_err(usage)?)
        }
        BackendKind::MockOracle => {
            let path = args.model.as_deref().unwrap_or(&args.knowledge);
            Box::new(OracleBackend::new(load_model(path, strict)?))
        }
        BackendKind::Http => {
            let mut config = BackendConfig::from_env();
            config.provider = args.provider.parse::<Provider>().map_err(usage)?;
            if let Some(e) = &args.endpoint {
                config.endpoint = Some(e.clone());
            }
            if let Some(m) = &args.model_id {
                config.model_id = m.clone();
            }
            config.timeout = Duration::try_from_secs_f64(args.timeout).map_err(usage)?;
            config.max_retries = args.max_retries;
            Box::new(HttpBackend::new(config).map_err(usage)?)
        }
    };
    let preds = match run_qa_batch(&knowledge, &examples, &questions, backend.as_ref(), args.parallel) {
        Ok(p) => p,
        Err(GatewayError::EmptyBatch) => Vec::new(),
        Err(e) => return Err(invalid(e)),
    };
    report_failures(&preds);
    emit(args.out.as_deref(), &to_jsonl_string(&preds))
}

fn run(cli: Cli) -> CmdResult {
    let strict = cli.strict;
    match &cli.command {
        Command::Check { opl, json } => cmd_check(opl, *json, strict),
        Command::Query { opl, object, from, to } => cmd_query(opl, object, from, to, strict),
        Command::Answer { opl, questions, out } => cmd_answer(opl, questions, out.as_deref(), strict),
        Command::Eval(args) => cmd_eval(args, strict),
        Command::ExportDot { opl, out } => cmd_export_dot(opl, out.as_deref(), strict),
        Command::RunLlm(args) => cmd_run_llm(args, strict),
        Command::Roundtrip { opl } => cmd_roundtrip(opl, strict),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
