use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use repdetect_core::classifier::save_model;
use repdetect_core::corpus::{filter_and_trim, load_corpus, save_corpus, split_human_holdout};
use repdetect_core::ensemble::{
    full_classification, read_ranking_jsonl, write_ranking_csv, write_ranking_jsonl,
};
use repdetect_core::index::{load_cache, save_cache};
use repdetect_core::metrics::{
    baseline_repeat_containment, diversity_histograms, gold_labels, mean_diversity, precision_at_m,
    precision_curve, write_precision_csv,
};
use repdetect_core::pseudo_label::write_audit_log;
use repdetect_core::repeats::{repeat_length_histogram, write_repeats_jsonl};
use repdetect_core::synth::toy::toy_language_text;
use repdetect_core::synth::{fit_markov, generate_corpus, sample_prompts, tokenize};
use repdetect_core::{
    build_index, mine_supermaximal, ClassifierConfig, Corpus, CorpusFormat, DecodingStrategy,
    Document, EnsembleConfig, Error, EvalReport, GenerationConfig, Label, MinerConfig, Mode,
    RankedList, Repeat, RoundConfig, SplitConfig, TrainMode,
};
use serde::Serialize;

use crate::args::*;
use crate::config;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(Error::Config(_)) => 1,
            CliError::Core(Error::Invariant(_)) => 3,
            CliError::Core(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| {
        CliError::Core(Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn ensure_parent(path: &Path) -> CliResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    Ok(())
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    ensure_parent(path)?;
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> CliResult {
    w.flush().map_err(io_err(path))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> CliResult {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(w).map_err(io_err(path))?;
    finish(w, path)
}

fn snapshot<T: Serialize>(command: &str, args: &T, path: &Path) -> CliResult {
    config::write_snapshot(command, args, path).map_err(CliError::Usage)
}

fn format_of(f: FormatArg) -> CorpusFormat {
    match f {
        FormatArg::Jsonl => CorpusFormat::Jsonl,
        FormatArg::TxtDir => CorpusFormat::PlaintextDir,
    }
}

fn label_of(l: LabelArg) -> Label {
    match l {
        LabelArg::Human => Label::Human,
        LabelArg::Machine => Label::Machine,
    }
}

fn load(path: &Path, format: FormatArg) -> CliResult<Corpus> {
    let (corpus, report) = load_corpus(path, format_of(format))?;
    for s in &report.skipped {
        log::warn!("{}: skipped line {}: {}", path.display(), s.line, s.reason);
    }
    log::info!("loaded {} documents from {}", corpus.len(), path.display());
    Ok(corpus)
}

fn classifier_config(a: &ClassifierArgs, seed: u64) -> CliResult<ClassifierConfig> {
    if a.hash_bits == 0 || a.hash_bits > 30 {
        return Err(CliError::Usage(format!(
            "--hash-bits must be in 1..=30, got {}",
            a.hash_bits
        )));
    }
    let cfg = ClassifierConfig {
        ngram_min: a.ngram_min,
        ngram_max: a.ngram_max,
        hash_dim: 1 << a.hash_bits,
        epochs: a.epochs,
        learning_rate: a.learning_rate,
        l2: a.l2,
        seed,
        mode: match a.train_mode {
            TrainModeArg::Sgd => TrainMode::Sgd,
            TrainModeArg::FullBatch => TrainMode::FullBatch,
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn miner_config(a: &MinerArgs) -> CliResult<MinerConfig> {
    let cfg = MinerConfig {
        min_len: a.min_len,
        min_occ: a.min_occ,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: crate::args::Cli) -> CliResult {
    let threads = match &cli.command {
        Command::Ingest(a) => a.common.threads,
        Command::Synth(a) => a.common.threads,
        Command::Repeats(a) => a.common.threads,
        Command::Detect(a) => a.common.threads,
        Command::Eval(a) => a.common.threads,
        Command::Diversity(a) => a.common.threads,
        Command::FullClassify(a) => a.common.threads,
    };
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    }
    match cli.command {
        Command::Ingest(a) => ingest(&a),
        Command::Synth(a) => synth(&a),
        Command::Repeats(a) => repeats(&a),
        Command::Detect(a) => detect(&a),
        Command::Eval(a) => eval(&a),
        Command::Diversity(a) => diversity(&a),
        Command::FullClassify(a) => full_classify(&a),
    }
}

fn ingest(a: &IngestArgs) -> CliResult {
    if a.holdout_fraction > 0.0 && a.holdout_output.is_none() {
        return Err(CliError::Usage(
            "--holdout-fraction > 0 requires --holdout-output".into(),
        ));
    }
    let mut corpus: Option<Corpus> = None;
    for path in &a.input {
        let next = load(path, a.format)?;
        corpus = Some(match corpus {
            None => next,
            Some(c) => c.merged(&next, "merged")?,
        });
    }
    let mut corpus =
        corpus.ok_or_else(|| CliError::Usage("at least one --input is required".into()))?;
    if let Some(l) = a.default_label {
        let docs = corpus
            .into_documents()
            .into_iter()
            .map(|d| Document {
                gold_label: d.gold_label.or(Some(label_of(l))),
                ..d
            })
            .collect();
        corpus = Corpus::new(docs, "merged")?;
    }
    let split = SplitConfig {
        human_holdout_fraction: a.holdout_fraction,
        min_chars: a.min_chars,
        trim_chars: (a.trim_chars > 0).then_some(a.trim_chars),
        seed: a.seed,
    };
    split.validate()?;
    let filtered = filter_and_trim(&corpus, &split)?;
    let dropped = corpus.len() - filtered.len();
    if dropped > 0 {
        log::info!(
            "dropped {dropped} documents shorter than {} characters",
            a.min_chars
        );
    }
    let (working, holdout) = split_human_holdout(&filtered, &split)?;
    ensure_parent(&a.output)?;
    save_corpus(&working, &a.output)?;
    if let Some(path) = &a.holdout_output {
        ensure_parent(path)?;
        save_corpus(&holdout, path)?;
    }
    eprintln!(
        "wrote {} documents to {} ({} held out, {dropped} dropped)",
        working.len(),
        a.output.display(),
        holdout.len()
    );
    snapshot("ingest", a, &config::snapshot_beside(&a.output))
}

fn synth(a: &SynthArgs) -> CliResult {
    let strategy = match a.strategy {
        StrategyArg::Greedy => DecodingStrategy::Greedy,
        StrategyArg::Ancestral => DecodingStrategy::Ancestral,
        StrategyArg::Topk => DecodingStrategy::TopK { k: a.k },
        StrategyArg::Nucleus => DecodingStrategy::Nucleus { p: a.p },
    };
    strategy.validate()?;
    let text = match &a.training {
        Some(path) => fs::read_to_string(path).map_err(io_err(path))?,
        None => toy_language_text(a.seed, a.toy_vocab, a.toy_tokens),
    };
    let tokens = tokenize(&text);
    let model = fit_markov(&tokens, a.order, a.smoothing)?;
    let ids = model.encode(&tokens);
    let prompt_len = a.prompt_len.unwrap_or(a.order.max(1));
    let prompts = sample_prompts(&ids, a.n_docs.max(1), prompt_len, a.seed);
    let id_prefix = a
        .id_prefix
        .clone()
        .unwrap_or_else(|| format!("{}-", strategy.name()));
    let generated = generate_corpus(
        &model,
        &prompts,
        &GenerationConfig {
            strategy,
            n_docs: a.n_docs,
            doc_len_tokens: a.doc_len,
            seed: a.seed,
            id_prefix,
        },
    )?;
    let label = label_of(a.label);
    let docs = generated
        .into_documents()
        .into_iter()
        .map(|d| d.with_label(label))
        .collect();
    let corpus = Corpus::new(docs, format!("synth:{strategy}"))?;
    ensure_parent(&a.output)?;
    save_corpus(&corpus, &a.output)?;
    eprintln!(
        "wrote {} {strategy} documents to {}",
        corpus.len(),
        a.output.display()
    );
    snapshot("synth", a, &config::snapshot_beside(&a.output))
}

fn mine(corpus: &Corpus, miner: &MinerConfig, cache: Option<&Path>) -> CliResult<Vec<Repeat>> {
    let index = match cache {
        Some(path) if path.exists() => match load_cache(corpus, path)? {
            Some(index) => {
                log::info!("using index cache {}", path.display());
                index
            }
            None => {
                log::warn!("index cache {} is stale, rebuilding", path.display());
                let index = build_index(corpus)?;
                save_cache(&index, corpus, path)?;
                index
            }
        },
        Some(path) => {
            let index = build_index(corpus)?;
            save_cache(&index, corpus, path)?;
            index
        }
        None => build_index(corpus)?,
    };
    Ok(mine_supermaximal(&index, miner))
}

fn repeats(a: &RepeatsArgs) -> CliResult {
    let miner = miner_config(&a.miner)?;
    if a.bucket_width == 0 {
        return Err(CliError::Usage("--bucket-width must be positive".into()));
    }
    let corpus = load(&a.input, a.format)?;
    let reps = mine(&corpus, &miner, a.index_cache.as_deref())?;

    let dump = a.output_dir.join("repeats.jsonl");
    let mut w = create(&dump)?;
    write_repeats_jsonl(&reps, &corpus, &mut w)?;
    finish(w, &dump)?;

    let hist_path = a.output_dir.join("length_histogram.csv");
    let mut w = create(&hist_path)?;
    writeln!(w, "start,end,count").map_err(io_err(&hist_path))?;
    for b in repeat_length_histogram(&reps, a.bucket_width).buckets() {
        writeln!(w, "{},{},{}", b.start, b.end, b.count).map_err(io_err(&hist_path))?;
    }
    finish(w, &hist_path)?;

    eprintln!("{} super-maximal repeats", reps.len());
    snapshot("repeats", a, &a.output_dir.join(config::SNAPSHOT_NAME))
}

/// Fills the evaluation part of a report and returns the precision curve,
/// or records why it was skipped.
fn evaluate(
    corpus: &Corpus,
    ranked: &RankedList,
    repeats: &[Repeat],
    cutoffs: &[usize],
    report: &mut EvalReport,
) -> CliResult<Option<BTreeMap<usize, f64>>> {
    let gold = gold_labels(corpus);
    if !corpus.has_gold_labels() {
        report.notices.push(
            "precision omitted: the corpus does not carry a gold label for every document".into(),
        );
        return Ok(None);
    }
    let curve = precision_curve(ranked, &gold, cutoffs)?;
    if curve.len() < cutoffs.len() {
        report.notices.push(format!(
            "precision cutoffs above the ranking length ({}) were skipped",
            ranked.len()
        ));
    }
    match baseline_repeat_containment(corpus, repeats, &gold) {
        Ok(b) => {
            report.precision_at_baseline_m = Some(precision_at_m(ranked, &gold, b.m)?);
            report.baseline_precision = Some(b);
        }
        Err(Error::NoRepeats) => report.notices.push("baseline omitted: no repeats".into()),
        Err(e) => return Err(e.into()),
    }
    report.precision_at = Some(curve.clone());
    Ok(Some(curve))
}

fn write_outputs(
    dir: &Path,
    report: &EvalReport,
    curve: Option<&BTreeMap<usize, f64>>,
) -> CliResult {
    write_json(report, &dir.join("report.json"))?;
    if let Some(curve) = curve {
        let path = dir.join("precision.csv");
        let mut w = create(&path)?;
        write_precision_csv(curve, &mut w)?;
        finish(w, &path)?;
    }
    Ok(())
}

fn detect(a: &DetectArgs) -> CliResult {
    let miner = miner_config(&a.miner)?;
    let classifier = classifier_config(&a.classifier, a.seed)?;
    let corpus = load(&a.input, a.format)?;

    let (working, holdout) = match (a.mode, &a.holdout) {
        (ModeArg::Unsupervised, _) => (corpus, Corpus::default()),
        (ModeArg::Semi, Some(path)) => (corpus, load(path, FormatArg::Jsonl)?),
        (ModeArg::Semi, None) => split_human_holdout(
            &corpus,
            &SplitConfig {
                human_holdout_fraction: a.holdout_fraction,
                min_chars: 0,
                trim_chars: None,
                seed: a.seed,
            },
        )?,
    };
    if a.mode == ModeArg::Semi && holdout.is_empty() {
        return Err(CliError::Core(Error::Corpus(
            "semi-supervised mode needs a non-empty human holdout".into(),
        )));
    }

    let cfg = EnsembleConfig {
        k: a.k_experts,
        round: RoundConfig {
            repeats_per_round: a.repeats_per_round,
            mode: match a.mode {
                ModeArg::Unsupervised => Mode::Unsupervised,
                ModeArg::Semi => Mode::SemiSupervised,
            },
            seed: a.seed,
        },
        classifier,
        miner,
        master_seed: a.seed,
    };
    let det = repdetect_core::run_detection(&working, &holdout, &cfg)?;

    let dir = &a.output_dir;
    let path = dir.join("ranking.csv");
    let mut w = create(&path)?;
    write_ranking_csv(&det.ranked, &mut w)?;
    finish(w, &path)?;
    let path = dir.join("ranking.jsonl");
    let mut w = create(&path)?;
    write_ranking_jsonl(&det.ranked, &mut w)?;
    finish(w, &path)?;
    let path = dir.join("audit.jsonl");
    let mut w = create(&path)?;
    write_audit_log(&det.rounds, &working, &holdout, &mut w)?;
    finish(w, &path)?;

    let mut report = EvalReport {
        n_documents: working.len(),
        effective_k: det.ranked.effective_k,
        tie_policy: det.ranked.tie_policy.to_string(),
        n_repeats: det.repeats.len(),
        skipped_rounds: det.skipped.len(),
        diversity_histogram: diversity_histograms(&working, a.diversity_width),
        ..Default::default()
    };
    for s in &det.skipped {
        report
            .notices
            .push(format!("round {} skipped: {}", s.round, s.reason));
    }
    let curve = evaluate(
        &working,
        &det.ranked,
        &det.repeats,
        &a.precision_at,
        &mut report,
    )?;
    write_outputs(dir, &report, curve.as_ref())?;

    eprintln!(
        "ranked {} documents with {} of {} classifiers",
        working.len(),
        det.ranked.effective_k,
        a.k_experts
    );
    for n in &report.notices {
        eprintln!("note: {n}");
    }
    snapshot("detect", a, &dir.join(config::SNAPSHOT_NAME))
}

fn eval(a: &EvalArgs) -> CliResult {
    let miner = miner_config(&a.miner)?;
    let corpus = load(&a.input, a.format)?;
    let file = File::open(&a.ranking).map_err(io_err(&a.ranking))?;
    let ranked = read_ranking_jsonl(BufReader::new(file))?;
    let reps = mine(&corpus, &miner, None)?;
    let mut report = EvalReport {
        n_documents: corpus.len(),
        effective_k: ranked.effective_k,
        tie_policy: ranked.tie_policy.to_string(),
        n_repeats: reps.len(),
        diversity_histogram: diversity_histograms(&corpus, a.diversity_width),
        ..Default::default()
    };
    let curve = evaluate(&corpus, &ranked, &reps, &a.precision_at, &mut report)?;
    write_outputs(&a.output_dir, &report, curve.as_ref())?;
    if let Some(curve) = &curve {
        for (m, p) in curve {
            println!("P@{m}\t{p:.4}");
        }
    }
    for n in &report.notices {
        eprintln!("note: {n}");
    }
    snapshot("eval", a, &a.output_dir.join(config::SNAPSHOT_NAME))
}

fn diversity(a: &DiversityArgs) -> CliResult {
    if a.bucket_width.is_nan() || a.bucket_width <= 0.0 {
        return Err(CliError::Usage("--bucket-width must be positive".into()));
    }
    let corpus = load(&a.input, a.format)?;
    let mut w = create(&a.output)?;
    writeln!(w, "source,start,end,count").map_err(io_err(&a.output))?;
    for (source, hist) in diversity_histograms(&corpus, a.bucket_width) {
        for b in hist.buckets() {
            writeln!(w, "{source},{},{},{}", b.start, b.end, b.count).map_err(io_err(&a.output))?;
        }
    }
    finish(w, &a.output)?;

    let mut by_source: BTreeMap<String, Vec<Document>> = BTreeMap::new();
    for d in &corpus {
        by_source
            .entry(d.source.clone().unwrap_or_else(|| "unknown".into()))
            .or_default()
            .push(d.clone());
    }
    for (source, docs) in by_source {
        let n = docs.len();
        let c = Corpus::new(docs, source.clone())?;
        println!("{source}\t{n}\t{:.4}", mean_diversity(&c));
    }
    snapshot("diversity", a, &config::snapshot_beside(&a.output))
}

#[derive(Serialize)]
struct FullClassifyResult {
    top_n: usize,
    accuracy: f64,
    model: String,
}

fn full_classify(a: &FullClassifyArgs) -> CliResult {
    let clf = classifier_config(&a.classifier, a.seed)?;
    let corpus = load(&a.input, FormatArg::Jsonl)?;
    let humans = load(&a.human, FormatArg::Jsonl)?;
    let test = load(&a.test, FormatArg::Jsonl)?;
    let file = File::open(&a.ranking).map_err(io_err(&a.ranking))?;
    let ranked = read_ranking_jsonl(BufReader::new(file))?;

    let mut results = Vec::new();
    for &n in &a.top_n {
        let (model, accuracy) = full_classification(&corpus, &humans, &ranked, n, &clf, &test)?;
        let name = format!("model_top{n}.bin");
        let path = a.output_dir.join(&name);
        ensure_parent(&path)?;
        save_model(&model, &path)?;
        println!("top_n={n}\taccuracy={accuracy:.4}");
        results.push(FullClassifyResult {
            top_n: n,
            accuracy,
            model: name,
        });
    }
    write_json(&results, &a.output_dir.join("full_classify.json"))?;
    snapshot(
        "full-classify",
        a,
        &a.output_dir.join(config::SNAPSHOT_NAME),
    )
}
