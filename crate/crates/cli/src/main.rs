use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use bioqa::bioasq::{BioAsqDataset, QuestionType};
use bioqa::conllu::parse_conllu;
use bioqa::eval::{evaluate_submission, GoldSets, NormalizationPolicy};
use bioqa::fetch::{fetch_documents, FetchOptions, UreqClient};
use bioqa::lat::{extract_lat, LatRecord};
use bioqa::listpost::postprocess_list;
use bioqa::nbest::parse_nbest;
use bioqa::pipeline::{load_preset, run_pipeline, AdapterExchange, ConfigOverrides, Invocation, Predictor, StubPredictor};
use bioqa::preprocess::{
    balance_zero_start, build_context, clean_dataset, examples_from_question, split_dataset, ContextSource,
    SpanStrategy, DEFAULT_WINDOW_CHARS,
};
use bioqa::squad::{from_qa_document, to_qa_document, QaDocument, QaExample};
use bioqa::submission::Submission;
use bioqa::yesno::{decide, parse_evidence, DEFAULT_THRESHOLD};

#[derive(Parser)]
#[command(name = "bioqa", version, about = "Exact-answer QA toolkit for BioASQ")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract lexical answer types from CoNLL-U parses (JSON lines).
    Analyze(AnalyzeArgs),
    /// Turn a BioASQ training file into a SQuAD-style QA document.
    Preprocess(PreprocessArgs),
    /// Drop a seeded fraction of examples whose answer starts at offset 0.
    Balance(BalanceArgs),
    /// Split and deduplicate list answers from n-best predictions.
    Postprocess(PostprocessArgs),
    /// Yes/no answers from contradiction evidence.
    Decide(DecideArgs),
    /// Score a submission against gold answers.
    Evaluate(EvaluateArgs),
    /// Run a batch end to end and write a submission.
    Run(RunArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// CoNLL-U file, one sentence per question.
    #[arg(long)]
    parses: PathBuf,
    /// Question ids, one per line, in parse order. Defaults to `# sent_id`.
    #[arg(long)]
    ids: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Lowest,
    Best,
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "snippets")]
    source: Source,
    #[arg(long, value_enum, default_value = "lowest")]
    strategy: Strategy,
    /// Neighbourhood size in characters for `--strategy best`.
    #[arg(long, default_value_t = DEFAULT_WINDOW_CHARS)]
    window: usize,
    #[arg(long)]
    out: PathBuf,
    /// Hold out this fraction of questions, written to `--test-out`.
    #[arg(long, requires = "test_out")]
    test_fraction: Option<f64>,
    #[arg(long)]
    test_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Snippets,
    Documents,
}

impl From<Source> for ContextSource {
    fn from(s: Source) -> Self {
        match s {
            Source::Snippets => ContextSource::Snippets,
            Source::Documents => ContextSource::Documents,
        }
    }
}

#[derive(Args)]
struct BalanceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.7)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PostprocessArgs {
    #[arg(long)]
    nbest: PathBuf,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecideArgs {
    #[arg(long)]
    evidence: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// BioASQ file with exact answers.
    #[arg(long)]
    gold: PathBuf,
    /// Submission file.
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "factoid,list,yesno", value_parser = parse_type)]
    types: Vec<QuestionType>,
    /// Fail when more gold questions than this have no prediction.
    #[arg(long)]
    max_missing: Option<usize>,
    /// Write the report as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// BioASQ test batch.
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    preset: Option<String>,
    /// TOML file; its keys override the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model adapter: a command template using {in}, {out} and {evidence},
    /// or an http(s) base URL.
    #[arg(long, conflicts_with = "nbest", required_unless_present = "nbest")]
    adapter: Option<String>,
    /// Precomputed n-best predictions used instead of an adapter.
    #[arg(long)]
    nbest: Option<PathBuf>,
    /// Precomputed entailment evidence, used with `--nbest`.
    #[arg(long, requires = "nbest")]
    evidence: Option<PathBuf>,
    /// CoNLL-U parses of the test questions for the LAT feature.
    #[arg(long)]
    parses: Option<PathBuf>,
    #[arg(long, requires = "parses")]
    ids: Option<PathBuf>,
    /// Directory for adapter exchange files. A temporary one by default.
    #[arg(long)]
    workdir: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_type(s: &str) -> std::result::Result<QuestionType, String> {
    s.parse().map_err(|e: bioqa::Error| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_json<T: serde::Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn parsed_questions(parses: &Path, ids: Option<&Path>) -> Result<Vec<(String, bioqa::conllu::ParsedQuestion)>> {
    let parsed = parse_conllu(&read(parses)?)?;
    let ids: Vec<String> = match ids {
        Some(p) => read(p)?.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect(),
        None => parsed
            .iter()
            .enumerate()
            .map(|(i, q)| q.sent_id.clone().unwrap_or_else(|| (i + 1).to_string()))
            .collect(),
    };
    if ids.len() != parsed.len() {
        bail!("{} ids for {} parses", ids.len(), parsed.len());
    }
    Ok(ids.into_iter().zip(parsed).collect())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(std::io::stdout().lock()),
    };
    for (id, q) in parsed_questions(&args.parses, args.ids.as_deref())? {
        let record = LatRecord::from_question(id, &q);
        if let Some(e) = &record.error {
            warn!("{}: {e}", record.question_id);
        }
        writeln!(out, "{}", serde_json::to_string(&record)?)?;
    }
    out.flush()?;
    Ok(())
}

fn fetch_all(ds: &BioAsqDataset) -> Result<BTreeMap<String, String>> {
    let urls: Vec<String> = ds.questions.iter().flat_map(|q| q.document_urls.iter().cloned()).collect();
    let outcome = fetch_documents(&urls, &FetchOptions::from_env(), &UreqClient::default())?;
    for (url, e) in &outcome.errors {
        warn!("document {url} unavailable: {e}");
    }
    Ok(outcome.texts)
}

fn preprocess(args: PreprocessArgs) -> Result<()> {
    let raw = BioAsqDataset::load(&args.input)?;
    let n_raw = raw.questions.len();
    let questions = clean_dataset(raw.questions);
    info!("{} of {n_raw} questions carry gold answers", questions.len());
    let (train, test) = match args.test_fraction {
        Some(f) => split_dataset(&questions, f, args.seed)?,
        None => (questions, Vec::new()),
    };
    let source = ContextSource::from(args.source);
    let docs = match source {
        ContextSource::Documents => fetch_all(&BioAsqDataset { questions: train.clone() })?,
        ContextSource::Snippets => BTreeMap::new(),
    };
    let strategy = match args.strategy {
        Strategy::Lowest => SpanStrategy::LowestIndex,
        Strategy::Best => SpanStrategy::BestOccurrence {
            window_chars: args.window,
        },
    };
    let mut examples: Vec<QaExample> = Vec::new();
    for q in &train {
        match build_context(q, source, &docs) {
            Ok(ctx) => examples.extend(examples_from_question(q, &ctx, strategy)),
            Err(e) => warn!("{e}"),
        }
    }
    let (doc, report) = to_qa_document(&examples);
    eprintln!("wrote {} examples, dropped {} without a located answer", report.written, report.dropped);
    write_json(Some(&args.out), &doc)?;
    if let Some(path) = &args.test_out {
        write_json(Some(path), &BioAsqDataset { questions: test })?;
    }
    Ok(())
}

fn balance(args: BalanceArgs) -> Result<()> {
    let doc: QaDocument = serde_json::from_str(&read(&args.input)?)?;
    let examples = from_qa_document(&doc);
    let kept = balance_zero_start(&examples, args.fraction, args.seed)?;
    eprintln!("kept {} of {} examples", kept.len(), examples.len());
    let (out, _) = to_qa_document(&kept);
    write_json(Some(&args.out), &out)
}

fn postprocess(args: PostprocessArgs) -> Result<()> {
    if args.k == 0 {
        bail!("--k must be at least 1");
    }
    let lists = parse_nbest(&read(&args.nbest)?)?;
    let answers: BTreeMap<&String, Vec<Vec<String>>> = lists
        .iter()
        .map(|(id, n)| (id, postprocess_list(n, args.k).to_exact_answer()))
        .collect();
    write_json(args.out.as_deref(), &answers)
}

fn decide_cmd(args: DecideArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&args.threshold) {
        bail!("--threshold must lie in [0, 1]");
    }
    let evidence = parse_evidence(&read(&args.evidence)?)?;
    let decisions: BTreeMap<&String, _> = evidence.iter().map(|(id, ev)| (id, decide(ev, args.threshold))).collect();
    write_json(args.out.as_deref(), &decisions)
}

fn evaluate(args: EvaluateArgs) -> Result<ExitCode> {
    let gold = GoldSets::from_dataset(&BioAsqDataset::load(&args.gold)?);
    let submission = Submission::load(&args.pred)?;
    let report = evaluate_submission(&submission, &gold, &args.types, &NormalizationPolicy::default())?;
    print!("{}", report.to_table());
    if let Some(p) = &args.out {
        write_json(Some(p), &report)?;
    }
    let missing = report.total_missing();
    if let Some(limit) = args.max_missing {
        if missing > limit {
            eprintln!("{missing} gold questions have no prediction (limit {limit})");
            return Ok(ExitCode::from(2));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = match &args.preset {
        Some(name) => load_preset(name)?,
        None => Default::default(),
    };
    if let Some(path) = &args.config {
        let overrides: ConfigOverrides =
            toml::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
        if let (None, Some(name)) = (&args.preset, &overrides.preset) {
            config = load_preset(name)?;
        }
        config = overrides.apply(config);
    }
    config.validate()?;
    info!("configuration:\n{}", config.to_toml());

    let test_set = BioAsqDataset::load(&args.test)?;
    let docs = match config.context_source {
        ContextSource::Documents => fetch_all(&test_set)?,
        ContextSource::Snippets => BTreeMap::new(),
    };
    let mut lats = BTreeMap::new();
    if let Some(parses) = &args.parses {
        for (id, q) in parsed_questions(parses, args.ids.as_deref())? {
            match extract_lat(&q) {
                Ok(r) => {
                    lats.insert(id, r.lat);
                }
                Err(e) => warn!("{id}: {e}"),
            }
        }
    }

    let tmp;
    let predictor: Box<dyn Predictor> = match (&args.adapter, &args.nbest) {
        (Some(adapter), _) => {
            let dir = match &args.workdir {
                Some(d) => {
                    std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
                    d.clone()
                }
                None => {
                    tmp = tempfile::tempdir()?;
                    tmp.path().to_path_buf()
                }
            };
            Box::new(AdapterExchange::in_dir(&dir, Invocation::parse(adapter)?))
        }
        (None, Some(nbest)) => Box::new(StubPredictor::from_files(nbest, args.evidence.as_deref())?),
        (None, None) => unreachable!("clap requires --adapter or --nbest"),
    };

    let output = run_pipeline(&test_set, &config, predictor.as_ref(), &docs, &lats)?;
    for w in &output.warnings {
        warn!("{w}");
    }
    write_json(Some(&args.out), &output.submission)?;
    eprintln!("wrote {} answers to {}", output.submission.questions.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => analyze(a).map(|_| ExitCode::SUCCESS),
        Command::Preprocess(a) => preprocess(a).map(|_| ExitCode::SUCCESS),
        Command::Balance(a) => balance(a).map(|_| ExitCode::SUCCESS),
        Command::Postprocess(a) => postprocess(a).map(|_| ExitCode::SUCCESS),
        Command::Decide(a) => decide_cmd(a).map(|_| ExitCode::SUCCESS),
        Command::Evaluate(a) => evaluate(a),
        Command::Run(a) => run(a).map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
