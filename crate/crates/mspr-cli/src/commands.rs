//! Subcommand implementations and configuration resolution.

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use mspr::agent::run_agent;
use mspr::baselines::{run_nor, run_react_ms, run_vanilla, VanillaSources};
use mspr::eval::{
    aggregate, exact_match, f1_score, load_dataset, DatasetFormat, ExampleScore, QaExample,
};
use mspr::index::{load_snapshot, save_snapshot, Bm25Index, CorpusDocument, DEFAULT_B, DEFAULT_K1};
use mspr::llm::{CachedBackend, LlmBackend, OpenAiCompatBackend, ScriptedBackend};
use mspr::trace::serialize_trace;
use mspr::web::{DuckDuckGoClient, ReplayStore, WebResult, WebSearch};
use mspr::{
    AgentContext, FinalAnswer, LlmBackendKind, Method, Query, RunConfig, Services,
    TerminationReason, WebBackendKind,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};

#[derive(Parser)]
#[command(name = "mspr", version, about = "Multi-source adaptive RAG runner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Build a BM25 snapshot from a line-delimited corpus file.
    Index(IndexArgs),
    /// Answer a dataset with the engine or a baseline.
    Run(RunArgs),
    /// Score a predictions file against its dataset.
    Eval(EvalArgs),
}

#[derive(Args)]
pub struct IndexArgs {
    /// Corpus file: one {"doc_id","title","text"} record per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Snapshot output path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_K1)]
    k1: f64,
    #[arg(long, default_value_t = DEFAULT_B)]
    b: f64,
}

#[derive(Args)]
pub struct RunArgs {
    /// Dataset file.
    #[arg(long)]
    dataset: PathBuf,
    /// Dataset format: canonical, hotpotqa, twowiki or musique.
    #[arg(long, default_value = "canonical")]
    dataset_format: String,
    /// Output directory for trace and prediction files.
    #[arg(long)]
    out: PathBuf,
    /// Optional TOML config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// mspr, nor, vanilla_lr, vanilla_wr, vanilla_lrwr or react_ms.
    #[arg(long)]
    method: Option<String>,
    /// BM25 snapshot built by `mspr index`.
    #[arg(long)]
    corpus_snapshot: Option<PathBuf>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    awi: Option<usize>,
    #[arg(long)]
    srt: Option<usize>,
    /// Enable observation refinement.
    #[arg(long, overrides_with = "no_ors")]
    ors: bool,
    /// Disable observation refinement.
    #[arg(long, overrides_with = "ors")]
    no_ors: bool,
    #[arg(long)]
    ors_threshold: Option<usize>,
    /// Disable the retrieval strategy selector (ablation).
    #[arg(long, overrides_with = "prs")]
    no_prs: bool,
    /// Re-enable the strategy selector over a config file.
    #[arg(long, overrides_with = "no_prs")]
    prs: bool,
    /// Disable the answer reviewer (ablation).
    #[arg(long, overrides_with = "car")]
    no_car: bool,
    /// Re-enable the answer reviewer over a config file.
    #[arg(long, overrides_with = "no_car")]
    car: bool,
    /// live, scripted or cached.
    #[arg(long)]
    llm_backend: Option<String>,
    /// Model name for the live backend.
    #[arg(long)]
    llm_model: Option<String>,
    /// live, replay or record.
    #[arg(long)]
    web_backend: Option<String>,
    /// Directory holding the web replay store and the model response cache.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Scripted responses file for the scripted backend.
    #[arg(long)]
    script: Option<PathBuf>,
    #[arg(long)]
    max_llm_calls: Option<u64>,
    /// Worker threads over examples.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Live web search rate ceiling, requests per second.
    #[arg(long, default_value_t = 1.0)]
    web_rps: f64,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Predictions file written by `mspr run`.
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "canonical")]
    dataset_format: String,
    /// Optional directory for report.txt and report.tsv.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Optional overrides loadable from a TOML file. Defaults < file < flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    top_k: Option<usize>,
    awi: Option<usize>,
    srt: Option<usize>,
    ors_enabled: Option<bool>,
    ors_threshold_chars: Option<usize>,
    prs_enabled: Option<bool>,
    car_enabled: Option<bool>,
    method: Option<String>,
    llm_backend: Option<String>,
    web_backend: Option<String>,
    max_llm_calls: Option<u64>,
    llm_model: Option<String>,
}

fn resolve_config(args: &RunArgs) -> anyhow::Result<(RunConfig, String)> {
    let mut config = RunConfig::default();
    let mut llm_model = "gpt-4o-mini".to_string();

    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let file: FileConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config file {}", path.display()))?;
        if let Some(v) = file.top_k {
            config.top_k = v;
        }
        if let Some(v) = file.awi {
            config.awi = v;
        }
        if let Some(v) = file.srt {
            config.srt = v;
        }
        if let Some(v) = file.ors_enabled {
            config.ors_enabled = v;
        }
        if let Some(v) = file.ors_threshold_chars {
            config.ors_threshold_chars = v;
        }
        if let Some(v) = file.prs_enabled {
            config.prs_enabled = v;
        }
        if let Some(v) = file.car_enabled {
            config.car_enabled = v;
        }
        if let Some(v) = &file.method {
            config.method = v.parse()?;
        }
        if let Some(v) = &file.llm_backend {
            config.llm_backend = v.parse()?;
        }
        if let Some(v) = &file.web_backend {
            config.web_backend = v.parse()?;
        }
        if file.max_llm_calls.is_some() {
            config.max_llm_calls = file.max_llm_calls;
        }
        if let Some(v) = file.llm_model {
            llm_model = v;
        }
    }

    if let Some(v) = args.top_k {
        config.top_k = v;
    }
    if let Some(v) = args.awi {
        config.awi = v;
    }
    if let Some(v) = args.srt {
        config.srt = v;
    }
    if args.ors {
        config.ors_enabled = true;
    }
    if args.no_ors {
        config.ors_enabled = false;
    }
    if let Some(v) = args.ors_threshold {
        config.ors_threshold_chars = v;
    }
    if args.prs {
        config.prs_enabled = true;
    }
    if args.no_prs {
        config.prs_enabled = false;
    }
    if args.car {
        config.car_enabled = true;
    }
    if args.no_car {
        config.car_enabled = false;
    }
    if let Some(v) = &args.method {
        config.method = v.parse()?;
    }
    if let Some(v) = &args.llm_backend {
        config.llm_backend = v.parse()?;
    }
    if let Some(v) = &args.web_backend {
        config.web_backend = v.parse()?;
    }
    if args.max_llm_calls.is_some() {
        config.max_llm_calls = args.max_llm_calls;
    }
    if let Some(v) = &args.llm_model {
        llm_model = v.clone();
    }

    config.validate()?;
    Ok((config, llm_model))
}

/// Placeholder for methods that never touch the web.
struct UnconfiguredWeb;

impl WebSearch for UnconfiguredWeb {
    fn search(&self, _query: &str, _top_k: usize) -> mspr::Result<Vec<WebResult>> {
        Err(mspr::Error::Config(
            "no web backend was configured for this run".into(),
        ))
    }
}

fn build_services(args: &RunArgs, config: &RunConfig, llm_model: &str) -> anyhow::Result<Services> {
    let index: Option<Arc<Bm25Index>> = match &args.corpus_snapshot {
        Some(path) => {
            Some(Arc::new(load_snapshot(path).with_context(|| {
                format!("loading snapshot {}", path.display())
            })?))
        }
        None => None,
    };
    if config.method.needs_index() && index.is_none() {
        bail!("method {} needs --corpus-snapshot", config.method);
    }

    let web: Arc<dyn WebSearch> = if config.method.needs_web() {
        match config.web_backend {
            WebBackendKind::Live => Arc::new(DuckDuckGoClient::new(args.web_rps)),
            WebBackendKind::Replay => {
                let path = web_store_path(args)?;
                Arc::new(
                    ReplayStore::replay(&path)
                        .with_context(|| format!("opening web replay store {}", path.display()))?,
                )
            }
            WebBackendKind::Record => {
                let path = web_store_path(args)?;
                Arc::new(
                    ReplayStore::record(&path, Box::new(DuckDuckGoClient::new(args.web_rps)))
                        .with_context(|| format!("opening web record store {}", path.display()))?,
                )
            }
        }
    } else {
        Arc::new(UnconfiguredWeb)
    };

    let llm: Arc<dyn LlmBackend> = match config.llm_backend {
        LlmBackendKind::Scripted => {
            let path = args
                .script
                .as_ref()
                .ok_or_else(|| anyhow!("--llm-backend scripted needs --script"))?;
            Arc::new(
                ScriptedBackend::load(path)
                    .with_context(|| format!("loading script {}", path.display()))?,
            )
        }
        LlmBackendKind::Live => Arc::new(OpenAiCompatBackend::from_env(llm_model)),
        LlmBackendKind::Cached => {
            let dir = args
                .cache_dir
                .as_ref()
                .ok_or_else(|| anyhow!("--llm-backend cached needs --cache-dir"))?
                .join("llm");
            Arc::new(CachedBackend::new(
                Box::new(OpenAiCompatBackend::from_env(llm_model)),
                dir,
            ))
        }
    };

    Ok(Services::new(llm, web, index))
}

fn web_store_path(args: &RunArgs) -> anyhow::Result<PathBuf> {
    let dir = args
        .cache_dir
        .as_ref()
        .ok_or_else(|| anyhow!("replay/record web backends need --cache-dir"))?;
    fs::create_dir_all(dir)?;
    Ok(dir.join("web_replay.jsonl"))
}

pub fn cmd_index(args: IndexArgs) -> anyhow::Result<i32> {
    let content = fs::read_to_string(&args.corpus)
        .with_context(|| format!("reading corpus {}", args.corpus.display()))?;
    let mut docs = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: CorpusDocument =
            serde_json::from_str(line).with_context(|| format!("corpus line {}", i + 1))?;
        docs.push(doc);
    }
    let index = Bm25Index::build(docs, args.k1, args.b)?;
    save_snapshot(&index, &args.out)?;
    println!(
        "indexed {} docs (avgdl {:.2}) -> {}",
        index.n_docs(),
        index.avgdl(),
        args.out.display()
    );
    Ok(0)
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionRecord {
    id: String,
    prediction: String,
    terminated_by: TerminationReason,
    llm_calls: u64,
    local_retrievals: u64,
    web_retrievals: u64,
}

fn run_example(
    example: &QaExample,
    config: &RunConfig,
    services: &Services,
) -> mspr::Result<(String, PredictionRecord)> {
    let query = Query::new(example.id.clone(), example.question.clone())?;
    let session = services.session(&query.id, config);

    let (answer, context): (FinalAnswer, AgentContext) = match config.method {
        Method::Mspr => {
            let outcome = run_agent(&query, config, &session)?;
            (outcome.answer, outcome.context)
        }
        Method::ReactMs => {
            let outcome = run_react_ms(&query, config, &session)?;
            (outcome.answer, outcome.context)
        }
        Method::Nor => (run_nor(&query, &session)?, AgentContext::new(query.clone())),
        Method::VanillaLr => (
            run_vanilla(&query, VanillaSources::Local, &session)?,
            AgentContext::new(query.clone()),
        ),
        Method::VanillaWr => (
            run_vanilla(&query, VanillaSources::Web, &session)?,
            AgentContext::new(query.clone()),
        ),
        Method::VanillaLrwr => (
            run_vanilla(&query, VanillaSources::LocalAndWeb, &session)?,
            AgentContext::new(query.clone()),
        ),
    };

    let stats = session.stats();
    let record = PredictionRecord {
        id: example.id.clone(),
        prediction: answer.text.clone(),
        terminated_by: answer.terminated_by,
        llm_calls: stats.llm_calls,
        local_retrievals: stats.local_retrievals,
        web_retrievals: stats.web_retrievals,
    };
    Ok((serialize_trace(&context, &answer), record))
}

fn existing_prediction_ids(path: &Path) -> anyhow::Result<HashSet<String>> {
    let mut ids = HashSet::new();
    if !path.exists() {
        return Ok(ids);
    }
    let file = fs::File::open(path)?;
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PredictionRecord =
            serde_json::from_str(&line).context("unreadable predictions line")?;
        ids.insert(record.id);
    }
    Ok(ids)
}

pub fn cmd_run(args: RunArgs) -> anyhow::Result<i32> {
    let (config, llm_model) = resolve_config(&args)?;
    let format: DatasetFormat = args.dataset_format.parse()?;
    let examples = load_dataset(&args.dataset, format)?;
    println!(
        "loaded {} examples from {}",
        examples.len(),
        args.dataset.display()
    );

    fs::create_dir_all(&args.out)?;
    let trace_path = args.out.join("trace.jsonl");
    let predictions_path = args.out.join("predictions.jsonl");
    let done = existing_prediction_ids(&predictions_path)?;
    let pending: Vec<&QaExample> = examples.iter().filter(|e| !done.contains(&e.id)).collect();
    if pending.len() < examples.len() {
        println!(
            "resuming: {} of {} examples already answered",
            examples.len() - pending.len(),
            examples.len()
        );
    }

    let services = build_services(&args, &config, &llm_model)?;

    let mut trace_file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&trace_path)?;
    let mut predictions_file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&predictions_path)?;

    let mut failures: Vec<(String, String)> = Vec::new();
    let mut written = 0usize;
    let jobs = args.jobs.max(1);

    let emit = |result: mspr::Result<(String, PredictionRecord)>,
                example_id: &str,
                trace_file: &mut fs::File,
                predictions_file: &mut fs::File,
                failures: &mut Vec<(String, String)>,
                written: &mut usize|
     -> anyhow::Result<()> {
        match result {
            Ok((trace_line, record)) => {
                writeln!(trace_file, "{trace_line}")?;
                writeln!(predictions_file, "{}", serde_json::to_string(&record)?)?;
                trace_file.flush()?;
                predictions_file.flush()?;
                *written += 1;
            }
            Err(e) => failures.push((example_id.to_string(), e.to_string())),
        }
        Ok(())
    };

    if jobs == 1 {
        for example in &pending {
            let result = run_example(example, &config, &services);
            emit(
                result,
                &example.id,
                &mut trace_file,
                &mut predictions_file,
                &mut failures,
                &mut written,
            )?;
        }
    } else {
        // worker pool over examples; output is buffered back into dataset
        // order so runs are reproducible regardless of scheduling
        let cursor = AtomicUsize::new(0);
        let (sender, receiver) =
            mpsc::channel::<(usize, mspr::Result<(String, PredictionRecord)>)>();
        std::thread::scope(|scope| -> anyhow::Result<()> {
            for _ in 0..jobs.min(pending.len().max(1)) {
                let sender = sender.clone();
                let cursor = &cursor;
                let pending = &pending;
                let config = &config;
                let services = &services;
                scope.spawn(move || loop {
                    let i = cursor.fetch_add(1, Ordering::SeqCst);
                    if i >= pending.len() {
                        break;
                    }
                    let result = run_example(pending[i], config, services);
                    if sender.send((i, result)).is_err() {
                        break;
                    }
                });
            }
            drop(sender);

            let mut buffer: BTreeMap<usize, mspr::Result<(String, PredictionRecord)>> =
                BTreeMap::new();
            let mut next = 0usize;
            for (i, result) in receiver {
                buffer.insert(i, result);
                while let Some(result) = buffer.remove(&next) {
                    emit(
                        result,
                        &pending[next].id,
                        &mut trace_file,
                        &mut predictions_file,
                        &mut failures,
                        &mut written,
                    )?;
                    next += 1;
                }
            }
            Ok(())
        })?;
    }

    println!(
        "wrote {written} predictions to {} ({} failures)",
        predictions_path.display(),
        failures.len()
    );
    if !failures.is_empty() {
        eprintln!("failed examples:");
        for (id, message) in &failures {
            eprintln!("  {id}: {message}");
        }
        return Ok(2);
    }
    Ok(0)
}

#[derive(Debug, Deserialize)]
struct PredictionLine {
    id: String,
    prediction: String,
}

pub fn cmd_eval(args: EvalArgs) -> anyhow::Result<i32> {
    let format: DatasetFormat = args.dataset_format.parse()?;
    let examples = load_dataset(&args.dataset, format)?;
    let by_id: BTreeMap<&str, &QaExample> = examples.iter().map(|e| (e.id.as_str(), e)).collect();

    let content = fs::read_to_string(&args.predictions)
        .with_context(|| format!("reading predictions {}", args.predictions.display()))?;
    let mut scores: Vec<ExampleScore> = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let pred: PredictionLine =
            serde_json::from_str(line).with_context(|| format!("predictions line {}", i + 1))?;
        let example = by_id
            .get(pred.id.as_str())
            .ok_or(mspr::Error::UnknownPredictionId(pred.id.clone()))?;
        scores.push(ExampleScore {
            id: pred.id.clone(),
            em: exact_match(&pred.prediction, &example.gold_answers),
            f1: f1_score(&pred.prediction, &example.gold_answers),
        });
    }

    let report = aggregate(scores)?;
    print!("{}", report.render_text());

    if let Some(out) = &args.out {
        fs::create_dir_all(out)?;
        fs::write(out.join("report.txt"), report.render_text())?;
        fs::write(out.join("report.tsv"), report.render_tsv())?;
        println!("reports written to {}", out.display());
    }
    Ok(0)
}
