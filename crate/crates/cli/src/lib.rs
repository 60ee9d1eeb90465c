//! The `ilid` command line: clean, split, describe, train, predict, score,
//! vote and harvest, each as one subcommand over files.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 on I/O
//! errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use ilid::classifiers::{train, LabeledDataset, ModelKind, TrainConfig, TrainedModel};
use ilid::corpus::{
    compute_stats, confidence_filter, load_corpus, noise_filter, save_corpus, split_corpus, write_rejections, Corpus,
    CorpusFormat, NoiseFilter, SentenceRecord, SplitSpec, StatsFormat,
};
use ilid::ensemble::load_ensemble;
use ilid::eval::{confusion, render_report, scores, ReportFormat};
use ilid::features::{FeatureKind, FeatureSpace, SparseVector};
use ilid::harvest::{
    load_page_sets, render_schedule, schedule_fetch, scrape_site, throttle_delay, PageSet, ThrottleConfig,
    DEFAULT_BANDWIDTH,
};
use ilid::synth::{generate, SynthConfig};
use ilid::textproc::{normalize_text, CleanConfig};
use ilid::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "ilid", version, about = "Sentence-level language identification toolkit")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "ILID_SEED", default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalize text and drop short, wrong-script and duplicate records.
    Clean(CleanArgs),
    /// Drop records whose own label gets low model probability.
    FilterConfidence(FilterArgs),
    /// Stratified train/dev/test split.
    Split(SplitArgs),
    /// Per-language corpus statistics.
    Stats(StatsArgs),
    /// Fit a feature space and train one classifier.
    Train(TrainArgs),
    /// Label every input line with a trained model.
    Predict(PredictArgs),
    /// Score predictions against gold labels.
    Eval(EvalArgs),
    /// Label every input line by ensemble vote.
    Ensemble(EnsembleArgs),
    /// Extract page text and plan a throttled fetch schedule.
    Harvest(HarvestArgs),
    /// Write a synthetic corpus of pseudo-languages.
    GenSynth(SynthArgs),
}

#[derive(Args, Debug)]
struct CleanArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    min_chars: usize,
    #[arg(long, default_value_t = 3)]
    min_words: usize,
    #[arg(long, default_value_t = 0.7)]
    script_purity: f64,
    /// Where to write `<line>\t<reason>` for dropped records.
    #[arg(long)]
    rejects: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FilterArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    vectorizer: PathBuf,
    #[arg(long, default_value_t = 0.7)]
    threshold: f64,
    #[arg(long)]
    rejects: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "0.8,0.1,0.1")]
    ratios: String,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// table, tsv or json.
    #[arg(long, default_value = "table")]
    format: String,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// nb, lr, svm, sgd, knn, dt, rf, ada or ftstyle.
    #[arg(long)]
    algo: String,
    /// word, char, combined or hashed; ftstyle defaults to hashed, all
    /// others to char.
    #[arg(long)]
    features: Option<String>,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    model_out: PathBuf,
    #[arg(long)]
    vectorizer_out: Option<PathBuf>,
    /// Reuse this fitted feature space instead of fitting a new one.
    #[arg(long, conflicts_with = "features")]
    vectorizer: Option<PathBuf>,
    /// Tree depth limit for dt, rf and their trees; 0 means unlimited.
    #[arg(long)]
    max_depth: Option<usize>,
    /// Number of trees for rf.
    #[arg(long)]
    trees: Option<usize>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    vectorizer: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
    /// table, tsv or json.
    #[arg(long, default_value = "table")]
    format: String,
}

#[derive(Args, Debug)]
struct EnsembleArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    vectorizer: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct HarvestArgs {
    /// Directory of `<site>/<page>.html` files.
    #[arg(long)]
    pages: PathBuf,
    /// Bytes per second.
    #[arg(long, default_value_t = DEFAULT_BANDWIDTH)]
    bandwidth: f64,
    #[arg(long)]
    plan_out: PathBuf,
    /// Where to write `<site>\t<block>` rows of extracted text.
    #[arg(long)]
    text_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 25)]
    langs: usize,
    #[arg(long, default_value_t = 200)]
    sents: usize,
    #[arg(long)]
    out: PathBuf,
}

/// Runs one command line (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ilid: {e}");
            if e.is_io() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Clean(a) => clean(a),
        Command::FilterConfidence(a) => filter_confidence(a),
        Command::Split(a) => split(a, seed),
        Command::Stats(a) => stats(a),
        Command::Train(a) => train_cmd(a, seed),
        Command::Predict(a) => predict(a),
        Command::Eval(a) => eval(a),
        Command::Ensemble(a) => ensemble(a),
        Command::Harvest(a) => harvest(a),
        Command::GenSynth(a) => gen_synth(a, seed),
    }
}

/// `.jsonl` files are JSON lines; anything else is TSV.
fn format_of(path: &Path) -> CorpusFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") => CorpusFormat::Jsonl,
        _ => CorpusFormat::Tsv,
    }
}

fn read_corpus(path: &Path) -> Result<Corpus> {
    load_corpus(path, format_of(path))
}

fn write_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    save_corpus(corpus, path, format_of(path))
}

fn clean(a: CleanArgs) -> Result<()> {
    let raw = read_corpus(&a.input)?;
    let cfg = CleanConfig::default();
    // A record that normalizes to nothing stays as-is; the length check
    // then drops it with the right line number.
    let normalized: Corpus = raw
        .records()
        .iter()
        .map(|r| SentenceRecord::new(r.label.clone(), normalize_text(&r.text, &cfg)).unwrap_or_else(|_| r.clone()))
        .collect();
    let filter = NoiseFilter {
        min_chars: a.min_chars,
        min_words: a.min_words,
        script_purity: a.script_purity,
        ..NoiseFilter::default()
    };
    let (kept, log) = noise_filter(&normalized, &filter)?;
    write_corpus(&kept, &a.out)?;
    if let Some(path) = a.rejects {
        fs::write(path, write_rejections(&log))?;
    }
    eprintln!("kept {} of {} records", kept.len(), raw.len());
    Ok(())
}

fn filter_confidence(a: FilterArgs) -> Result<()> {
    let corpus = read_corpus(&a.input)?;
    let features = FeatureSpace::load(&a.vectorizer)?;
    let model = TrainedModel::load(&a.model)?;
    let (kept, log) = confidence_filter(&corpus, &features, &model, a.threshold)?;
    write_corpus(&kept, &a.out)?;
    if let Some(path) = a.rejects {
        fs::write(path, write_rejections(&log))?;
    }
    eprintln!("kept {} of {} records", kept.len(), corpus.len());
    Ok(())
}

fn split(a: SplitArgs, seed: u64) -> Result<()> {
    let corpus = read_corpus(&a.input)?;
    let spec = SplitSpec::parse(&a.ratios, seed)?;
    let parts = split_corpus(&corpus, &spec);
    fs::create_dir_all(&a.out_dir)?;
    let ext = format_of(&a.input).to_string();
    for (name, part) in [("train", &parts.train), ("dev", &parts.dev), ("test", &parts.test)] {
        write_corpus(part, &a.out_dir.join(format!("{name}.{ext}")))?;
    }
    eprintln!("train {} / dev {} / test {}", parts.train.len(), parts.dev.len(), parts.test.len());
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    let format: StatsFormat = a.format.parse()?;
    let corpus = read_corpus(&a.input)?;
    print!("{}", compute_stats(&corpus).render(format)?);
    Ok(())
}

fn train_cmd(a: TrainArgs, seed: u64) -> Result<()> {
    let kind: ModelKind = a.algo.parse()?;
    let corpus = read_corpus(&a.train)?;
    let features = match &a.vectorizer {
        Some(path) => FeatureSpace::load(path)?,
        None => {
            let fk = match &a.features {
                Some(f) => f.parse()?,
                None if kind == ModelKind::FtStyle => FeatureKind::Hashed,
                None => FeatureKind::Char,
            };
            FeatureSpace::fit(fk, &corpus)?
        }
    };
    let data = LabeledDataset::from_corpus(&corpus, &features)?;
    let mut cfg = TrainConfig::with_seed(seed);
    if let Some(d) = a.max_depth {
        let depth = (d > 0).then_some(d);
        cfg.tree.max_depth = depth;
        cfg.forest.tree.max_depth = depth;
    }
    if let Some(t) = a.trees {
        cfg.forest.n_trees = t;
    }
    let model = train(kind, &data, &cfg)?;
    model.save(&a.model_out)?;
    if let Some(path) = a.vectorizer_out {
        features.save(path)?;
    }
    eprintln!("trained {kind} on {} records, {} labels, dimension {}", data.len(), data.n_labels(), data.dim());
    Ok(())
}

/// Input lines are either bare text or `label\ttext`; the text part is
/// classified.
fn read_lines(path: &Path) -> Result<Vec<String>> {
    let bytes = fs::read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Decode { offset: e.utf8_error().valid_up_to() })?;
    let body = text.strip_suffix('\n').unwrap_or(&text);
    if body.is_empty() {
        return Ok(Vec::new());
    }
    Ok(body
        .split('\n')
        .map(|l| {
            let l = l.strip_suffix('\r').unwrap_or(l);
            l.split_once('\t').map_or(l, |(_, t)| t).to_string()
        })
        .collect())
}

fn write_labeled(path: &Path, labels: &[String], texts: &[String]) -> Result<()> {
    let mut out = Vec::new();
    for (l, t) in labels.iter().zip(texts) {
        writeln!(out, "{l}\t{t}")?;
    }
    fs::write(path, out)?;
    Ok(())
}

fn label_lines<F>(input: &Path, out: &Path, features: &FeatureSpace, f: F) -> Result<()>
where
    F: Fn(&SparseVector) -> Result<String> + Sync,
{
    let texts = read_lines(input)?;
    let labels = texts.par_iter().map(|t| f(&features.transform(t))).collect::<Result<Vec<_>>>()?;
    write_labeled(out, &labels, &texts)
}

fn predict(a: PredictArgs) -> Result<()> {
    let model = TrainedModel::load(&a.model)?;
    let features = FeatureSpace::load(&a.vectorizer)?;
    label_lines(&a.input, &a.out, &features, |v| model.predict(v).map(str::to_string))
}

fn ensemble(a: EnsembleArgs) -> Result<()> {
    let spec = load_ensemble(&a.spec)?;
    let features = FeatureSpace::load(&a.vectorizer)?;
    label_lines(&a.input, &a.out, &features, |v| spec.predict(v))
}

/// First column of every line.
fn read_label_column(path: &Path) -> Result<Vec<String>> {
    Ok(fs::read_to_string(path)?.lines().map(|l| l.split('\t').next().unwrap_or("").to_string()).collect())
}

fn eval(a: EvalArgs) -> Result<()> {
    let format: ReportFormat = a.format.parse()?;
    let gold = read_label_column(&a.gold)?;
    let pred = read_label_column(&a.pred)?;
    let report = render_report(&scores(&confusion(&gold, &pred)?), format)?;
    match a.report {
        Some(path) => fs::write(path, report)?,
        None => print!("{report}"),
    }
    Ok(())
}

fn harvest(a: HarvestArgs) -> Result<()> {
    let cfg = ThrottleConfig::new(a.bandwidth)?;
    let sites = load_page_sets(&a.pages)?;
    let plan = schedule_fetch(&sites, &cfg)?;
    fs::write(&a.plan_out, render_schedule(&plan))?;
    if let Some(path) = a.text_out {
        let mut out = String::new();
        for site in &sites {
            for block in scrape_site(site) {
                out.push_str(&format!("{}\t{block}\n", site.site_id));
            }
        }
        fs::write(path, out)?;
    }
    let sizes: Vec<u64> = sites.iter().map(PageSet::total_size).collect();
    println!("delay {} s between fetches over {} sites", throttle_delay(&sizes, &cfg)?, sites.len());
    Ok(())
}

fn gen_synth(a: SynthArgs, seed: u64) -> Result<()> {
    let corpus = generate(&SynthConfig { languages: a.langs, sentences: a.sents, seed })?;
    write_corpus(&corpus, &a.out)
}
