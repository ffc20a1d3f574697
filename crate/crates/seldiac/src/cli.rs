//! The command-line surface: each subcommand wraps one pipeline stage,
//! reads declared inputs, writes declared outputs (plus a `.meta` sidecar
//! echoing the effective settings), and prints a one-line summary to
//! stderr. Machine-readable results (stats, patterns, eval-pos, bootstrap)
//! go to stdout.
//!
//! Exit codes: 0 success, 1 usage error (bad flags or config), 2 data
//! error (unreadable, malformed, or inconsistent inputs).

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rand::Rng;
use serde::Deserialize;

use crate::align::{train_ibm2, write_alignments, TopN, TranslationTable};
use crate::ambig::{
    apply_selective, build_cl, build_multi, build_sense, build_tr, AmbigDict, MorphLexicon,
};
use crate::clustering::{
    brown, build_ego_graph, chinese_whispers, gmm_em, kmeans, ClusterAlgo, ClusterAssignment,
};
use crate::corpus::{
    build_variant_map, clean, derive_views, CleanConfig, Corpus, ParallelCorpus,
    Scheme,
};
use crate::embeddings::{train_sgns, EmbeddingTable, SgnsParams};
use crate::evalkit::{
    ambiguity_stats, evaluate_tagger, paired_bootstrap, pattern_report, train_pos_tagger,
    SliceSpec, TaggedCorpus,
};
use crate::textcore::DiacriticSet;

/// Entry point behind `main`: parses, runs, maps errors to exit codes.
pub fn run_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            1
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

/// Errors split by exit code: bad invocations vs bad data.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Data(e.into())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Parser)]
#[command(
    name = "seldiac",
    version,
    about = "Selective-diacritization corpus toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// TOML file supplying defaults for any tunable
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads (default: $SELDIAC_THREADS, then the config file,
    /// then 1)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Reproducible mode: single-threaded, and randomized stages must be
    /// given an explicit seed
    #[arg(long, global = true)]
    deterministic: bool,
}

/// File-supplied defaults. Every field is optional; command-line flags win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub max_len: Option<usize>,
    pub dim: Option<usize>,
    pub window: Option<usize>,
    pub negatives: Option<usize>,
    pub epochs: Option<usize>,
    pub min_count: Option<usize>,
    pub subsample: Option<f64>,
    pub learning_rate: Option<f64>,
    pub k: Option<usize>,
    pub n_init: Option<usize>,
    pub graph_size: Option<usize>,
    pub granularity: Option<usize>,
    pub min_cluster: Option<usize>,
    pub iterations: Option<usize>,
    pub lambda0: Option<f64>,
    pub p_null: Option<f64>,
    pub top_n: Option<String>,
    pub resamples: Option<usize>,
}

impl PipelineConfig {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(PipelineConfig::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("--config {}: {e}", path.display())))?;
        let config: PipelineConfig = toml::from_str(&text)
            .map_err(|e| usage(format!("--config {}: {e}", path.display())))?;
        config.validate().map_err(usage)?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), String> {
        fn positive(name: &str, v: Option<usize>) -> Result<(), String> {
            match v {
                Some(0) => Err(format!("config key {name} must be positive")),
                _ => Ok(()),
            }
        }
        positive("threads", self.threads)?;
        positive("max_len", self.max_len)?;
        positive("dim", self.dim)?;
        positive("window", self.window)?;
        positive("negatives", self.negatives)?;
        positive("epochs", self.epochs)?;
        positive("k", self.k)?;
        positive("n_init", self.n_init)?;
        positive("graph_size", self.graph_size)?;
        positive("granularity", self.granularity)?;
        positive("min_cluster", self.min_cluster)?;
        positive("iterations", self.iterations)?;
        positive("resamples", self.resamples)?;
        if let Some(lr) = self.learning_rate {
            if !(lr > 0.0) {
                return Err("config key learning_rate must be positive".into());
            }
        }
        if let Some(l) = self.lambda0 {
            if !(l >= 0.0) {
                return Err("config key lambda0 must be non-negative".into());
            }
        }
        if let Some(p) = self.p_null {
            if !(0.0..1.0).contains(&p) {
                return Err("config key p_null must be in [0, 1)".into());
            }
        }
        if let Some(t) = &self.top_n {
            t.parse::<TopN>()
                .map_err(|e| format!("config key top_n: {e}"))?;
        }
        Ok(())
    }
}

/// CLI flag beats config file beats built-in default.
fn pick<T: Clone>(cli: Option<T>, cfg: Option<T>, default: T) -> T {
    cli.or(cfg).unwrap_or(default)
}

/// Settles the seed for a randomized stage: an explicit value (flag or
/// config) is used as given; otherwise deterministic mode refuses, and
/// normal mode draws one from entropy and reports it.
fn resolve_seed(
    flag: Option<u64>,
    cfg: Option<u64>,
    deterministic: bool,
    stage: &str,
) -> Result<u64, CliError> {
    if let Some(seed) = flag.or(cfg) {
        return Ok(seed);
    }
    if deterministic {
        return Err(usage(format!(
            "--deterministic requires an explicit --seed for {stage}"
        )));
    }
    let seed: u64 = rand::thread_rng().gen();
    eprintln!("seed={seed}");
    Ok(seed)
}

fn resolve_threads(global: &Global, cfg: &PipelineConfig) -> Result<usize, CliError> {
    if global.deterministic {
        return Ok(1);
    }
    let env = match std::env::var("SELDIAC_THREADS") {
        Ok(v) => Some(v.parse::<usize>().map_err(|_| {
            usage(format!("SELDIAC_THREADS must be a thread count, found {v:?}"))
        })?),
        Err(_) => None,
    };
    let threads = pick(global.threads, env.or(cfg.threads), 1);
    if threads == 0 {
        return Err(usage("--threads must be positive"));
    }
    Ok(threads)
}

fn parse_scheme(s: &str, flag: &str) -> Result<Scheme, CliError> {
    s.parse::<Scheme>()
        .map_err(|e| usage(format!("{flag}: {e}")))
}

/// Writes `<out>.meta`: one `key=value` line per effective setting, stage
/// first, the rest sorted. No timestamps, so reruns are byte-identical.
fn write_meta(out: &Path, stage: &str, entries: &[(&str, String)]) -> Result<(), CliError> {
    let mut sorted: Vec<&(&str, String)> = entries.iter().collect();
    sorted.sort();
    let mut text = format!("stage={stage}\n");
    for (k, v) in sorted {
        text.push_str(&format!("{k}={v}\n"));
    }
    let path = meta_path(out);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".meta");
    PathBuf::from(s)
}

fn read_corpus(path: &Path, scheme: Scheme) -> Result<Corpus, CliError> {
    Corpus::from_path(path, scheme)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(CliError::Data)
}

fn write_corpus(c: &Corpus, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => c
            .to_path(path)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(CliError::Data),
        None => {
            let stdout = std::io::stdout();
            c.write_to(&mut stdout.lock())?;
            Ok(())
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Normalize raw text into a token-per-space corpus file
    Clean(CleanArgs),
    /// Derive the undiacritized and case/mood-stripped views of a corpus
    Views(ViewsArgs),
    /// Train word embeddings on a corpus
    Embed(EmbedArgs),
    /// Cluster embedding vectors, corpus types, or one word's neighborhood
    Cluster(ClusterArgs),
    /// Train a word aligner on a parallel corpus and dump its tables
    Align(AlignArgs),
    /// Build an ambiguity dictionary
    #[command(name = "build-dict")]
    BuildDict(BuildDictArgs),
    /// Apply a dictionary to a diacritized corpus, stripping the rest
    Apply(ApplyArgs),
    /// Print size and ambiguity share of a dictionary
    Stats(StatsArgs),
    /// Report which diacritic-pattern contrasts a dictionary preserves
    Patterns(PatternsArgs),
    /// Train and score a POS tagger under a diacritization scheme
    #[command(name = "eval-pos")]
    EvalPos(EvalPosArgs),
    /// Paired bootstrap significance between two score files
    Bootstrap(BootstrapArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = PipelineConfig::load(cli.global.config.as_deref())?;
    let threads = resolve_threads(&cli.global, &cfg)?;
    match cli.command {
        Command::Clean(args) => run_clean(args, &cfg),
        Command::Views(args) => run_views(args),
        Command::Embed(args) => run_embed(args, &cli.global, &cfg, threads),
        Command::Cluster(args) => run_cluster(args, &cli.global, &cfg),
        Command::Align(args) => run_align(args, &cfg),
        Command::BuildDict(args) => run_build_dict(args, &cli.global, &cfg),
        Command::Apply(args) => run_apply(args),
        Command::Stats(args) => run_stats(args),
        Command::Patterns(args) => run_patterns(args),
        Command::EvalPos(args) => run_eval_pos(args, &cli.global, &cfg),
        Command::Bootstrap(args) => run_bootstrap(args, &cli.global, &cfg),
    }
}

#[derive(Args)]
struct CleanArgs {
    /// Raw input text, one candidate sentence per line
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Cleaned corpus destination
    #[arg(long = "out", value_name = "FILE")]
    output: PathBuf,
    /// Split sentences longer than this many tokens
    #[arg(long, value_name = "N")]
    max_len: Option<usize>,
    /// Input is Buckwalter-transliterated ASCII rather than Arabic script
    #[arg(long)]
    buckwalter: bool,
}

fn run_clean(args: CleanArgs, cfg: &PipelineConfig) -> Result<(), CliError> {
    let max_len = pick(args.max_len, cfg.max_len, CleanConfig::default().max_len);
    if max_len == 0 {
        return Err(usage("--max-len must be positive"));
    }
    let config = CleanConfig {
        max_len,
        buckwalter: args.buckwalter,
    };
    let file = fs::File::open(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let (corpus, report) = clean(file, &config)?;
    write_corpus(&corpus, Some(&args.output))?;
    write_meta(
        &args.output,
        "clean",
        &[
            ("input", args.input.display().to_string()),
            ("max_len", max_len.to_string()),
            ("buckwalter", args.buckwalter.to_string()),
            ("scheme", corpus.scheme.to_string()),
        ],
    )?;
    eprintln!(
        "clean: {} sentences ({} split, {} dropped, {} invalid lines) -> {}",
        report.sentences, report.split_sentences, report.dropped_long, report.invalid_lines,
        args.output.display()
    );
    Ok(())
}

#[derive(Args)]
struct ViewsArgs {
    /// Fully diacritized corpus
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Destination for the undiacritized view
    #[arg(long, value_name = "FILE")]
    none: PathBuf,
    /// Destination for the case/mood-stripped view
    #[arg(long, value_name = "FILE")]
    fullcm: PathBuf,
}

fn run_views(args: ViewsArgs) -> Result<(), CliError> {
    let full = read_corpus(&args.input, Scheme::Full)?;
    let d = DiacriticSet::default();
    let (none, fullcm) = derive_views(&full, &d);
    write_corpus(&none, Some(&args.none))?;
    write_corpus(&fullcm, Some(&args.fullcm))?;
    let common = [("input", args.input.display().to_string())];
    write_meta(
        &args.none,
        "views",
        &[common[0].clone(), ("scheme", none.scheme.to_string())],
    )?;
    write_meta(
        &args.fullcm,
        "views",
        &[common[0].clone(), ("scheme", fullcm.scheme.to_string())],
    )?;
    eprintln!(
        "views: {} sentences -> {} ({}), {} ({})",
        full.sentences.len(),
        args.none.display(),
        none.scheme,
        args.fullcm.display(),
        fullcm.scheme
    );
    Ok(())
}

#[derive(Args)]
struct EmbedArgs {
    /// Tokenized training corpus
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Diacritization scheme of the corpus (recorded with the vectors)
    #[arg(long, value_name = "SCHEME")]
    scheme: String,
    /// Vector destination (context vectors go to `<out>.ctx`)
    #[arg(long = "out", value_name = "FILE")]
    output: PathBuf,
    #[arg(long, value_name = "N")]
    dim: Option<usize>,
    #[arg(long, value_name = "N")]
    window: Option<usize>,
    #[arg(long, value_name = "N")]
    negatives: Option<usize>,
    #[arg(long, value_name = "N")]
    epochs: Option<usize>,
    /// Drop words seen fewer times than this
    #[arg(long, value_name = "N")]
    min_count: Option<usize>,
    /// Frequent-word subsampling threshold (0 disables)
    #[arg(long, value_name = "T")]
    subsample: Option<f64>,
    #[arg(long, value_name = "LR")]
    learning_rate: Option<f64>,
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
}

fn run_embed(
    args: EmbedArgs,
    global: &Global,
    cfg: &PipelineConfig,
    threads: usize,
) -> Result<(), CliError> {
    let scheme = parse_scheme(&args.scheme, "--scheme")?;
    let seed = resolve_seed(args.seed, cfg.seed, global.deterministic, "embed")?;
    let defaults = SgnsParams::default();
    let params = SgnsParams {
        dim: pick(args.dim, cfg.dim, defaults.dim),
        window: pick(args.window, cfg.window, defaults.window),
        negatives: pick(args.negatives, cfg.negatives, defaults.negatives),
        epochs: pick(args.epochs, cfg.epochs, defaults.epochs),
        min_count: pick(args.min_count, cfg.min_count, defaults.min_count),
        subsample: pick(args.subsample, cfg.subsample, defaults.subsample),
        learning_rate: pick(args.learning_rate, cfg.learning_rate, defaults.learning_rate),
        seed,
        threads,
    };
    if params.dim == 0 || params.window == 0 || params.epochs == 0 {
        return Err(usage("--dim, --window and --epochs must be positive"));
    }
    if !(params.learning_rate > 0.0) {
        return Err(usage("--learning-rate must be positive"));
    }
    let corpus = read_corpus(&args.input, scheme)?;
    let table = train_sgns(&corpus, &params)?;
    table
        .save(&args.output)
        .with_context(|| format!("writing {}", args.output.display()))?;
    write_meta(
        &args.output,
        "embed",
        &[
            ("input", args.input.display().to_string()),
            ("scheme", table.trained_on.to_string()),
            ("dim", params.dim.to_string()),
            ("window", params.window.to_string()),
            ("negatives", params.negatives.to_string()),
            ("epochs", params.epochs.to_string()),
            ("min_count", params.min_count.to_string()),
            ("subsample", format!("{}", params.subsample)),
            ("learning_rate", format!("{}", params.learning_rate)),
            ("seed", seed.to_string()),
            ("threads", threads.to_string()),
        ],
    )?;
    let final_loss = table
        .epoch_probe_loss
        .last()
        .map(|l| format!("{l:.6}"))
        .unwrap_or_else(|| "n/a".into());
    eprintln!(
        "embed: {} types x {} dims, {} epochs, probe loss {} -> {}",
        table.len(),
        table.dim(),
        params.epochs,
        final_loss,
        args.output.display()
    );
    Ok(())
}

#[derive(Args)]
struct ClusterArgs {
    /// Clustering algorithm: km, em, br, or cw
    #[arg(long, value_name = "ALGO")]
    algo: String,
    /// Assignment destination
    #[arg(long = "out", value_name = "FILE")]
    output: PathBuf,
    /// Embedding file (km, em, cw)
    #[arg(long, value_name = "FILE")]
    embeddings: Option<PathBuf>,
    /// Tokenized corpus (br)
    #[arg(long, value_name = "FILE")]
    corpus: Option<PathBuf>,
    /// Diacritization scheme of the embeddings or corpus
    #[arg(long, value_name = "SCHEME")]
    scheme: String,
    /// Number of clusters (km, em, br)
    #[arg(long, value_name = "K")]
    k: Option<usize>,
    /// Restrict km/em to the words listed in this file, one per line
    #[arg(long, value_name = "FILE")]
    words: Option<PathBuf>,
    /// Word whose neighborhood graph cw partitions
    #[arg(long, value_name = "WORD")]
    word: Option<String>,
    /// Random restarts for km
    #[arg(long, value_name = "N")]
    n_init: Option<usize>,
    /// Drop words seen fewer times than this (br)
    #[arg(long, value_name = "N")]
    min_count: Option<usize>,
    /// Neighborhood size for cw
    #[arg(long, value_name = "N")]
    graph_size: Option<usize>,
    /// Edges kept per neighborhood node for cw
    #[arg(long, value_name = "N")]
    granularity: Option<usize>,
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
}

const KMEANS_MAX_ITER: usize = 100;
const KMEANS_TOL: f64 = 1e-9;
const GMM_MAX_ITER: usize = 200;
const GMM_TOL: f64 = 1e-8;
const CW_ITERATIONS: usize = 20;

fn load_points(
    args: &ClusterArgs,
    scheme: Scheme,
) -> Result<Vec<(String, Vec<f32>)>, CliError> {
    let path = args
        .embeddings
        .as_ref()
        .ok_or_else(|| usage(format!("--algo {} requires --embeddings", args.algo)))?;
    let table = EmbeddingTable::load(path, scheme)
        .with_context(|| format!("reading {}", path.display()))?;
    let wanted: Vec<String> = match &args.words {
        None => table.vocab().to_vec(),
        Some(list) => {
            let text = fs::read_to_string(list)
                .with_context(|| format!("reading {}", list.display()))?;
            let mut words: Vec<String> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect();
            words.sort_unstable();
            words.dedup();
            words
        }
    };
    let mut points = Vec::with_capacity(wanted.len());
    for w in wanted {
        let i = table.index_of(&w).ok_or_else(|| {
            CliError::Data(anyhow::anyhow!(
                "word {w:?} from --words is not in the embedding vocabulary"
            ))
        })?;
        points.push((w, table.word_vec(i).to_vec()));
    }
    Ok(points)
}

fn run_cluster(args: ClusterArgs, global: &Global, cfg: &PipelineConfig) -> Result<(), CliError> {
    let algo: ClusterAlgo = args
        .algo
        .parse()
        .map_err(|e| usage(format!("--algo: {e}")))?;
    let scheme = parse_scheme(&args.scheme, "--scheme")?;
    let mut meta: Vec<(&str, String)> = vec![
        ("algo", algo.to_string()),
        ("scheme", scheme.to_string()),
    ];
    let need_k = || {
        args.k
            .or(cfg.k)
            .ok_or_else(|| usage(format!("--algo {algo} requires --k")))
    };
    let assignment: ClusterAssignment = match algo {
        ClusterAlgo::Km => {
            let k = need_k()?;
            let seed = resolve_seed(args.seed, cfg.seed, global.deterministic, "cluster")?;
            let n_init = pick(args.n_init, cfg.n_init, 10);
            if n_init == 0 {
                return Err(usage("--n-init must be positive"));
            }
            let points = load_points(&args, scheme)?;
            let fit = kmeans(&points, k, n_init, seed, KMEANS_MAX_ITER, KMEANS_TOL)?;
            meta.push(("embeddings", args.embeddings.as_ref().unwrap().display().to_string()));
            meta.push(("k", k.to_string()));
            meta.push(("n_init", n_init.to_string()));
            meta.push(("seed", seed.to_string()));
            fit.assignment
        }
        ClusterAlgo::Em => {
            let k = need_k()?;
            let seed = resolve_seed(args.seed, cfg.seed, global.deterministic, "cluster")?;
            let points = load_points(&args, scheme)?;
            let fit = gmm_em(&points, k, seed, GMM_MAX_ITER, GMM_TOL)?;
            meta.push(("embeddings", args.embeddings.as_ref().unwrap().display().to_string()));
            meta.push(("k", k.to_string()));
            meta.push(("seed", seed.to_string()));
            fit.assignment
        }
        ClusterAlgo::Br => {
            let k = need_k()?;
            let path = args
                .corpus
                .as_ref()
                .ok_or_else(|| usage("--algo br requires --corpus"))?;
            let min_count = pick(args.min_count, cfg.min_count, 1);
            let c = read_corpus(path, scheme)?;
            let fit = brown(&c, k, min_count)?;
            meta.push(("corpus", path.display().to_string()));
            meta.push(("k", k.to_string()));
            meta.push(("min_count", min_count.to_string()));
            fit.assignment
        }
        ClusterAlgo::Cw => {
            if args.k.is_some() {
                return Err(usage("--k is not used with --algo cw (clusters emerge)"));
            }
            let word = args
                .word
                .as_ref()
                .ok_or_else(|| usage("--algo cw requires --word"))?;
            let seed = resolve_seed(args.seed, cfg.seed, global.deterministic, "cluster")?;
            let graph_size = pick(args.graph_size, cfg.graph_size, 200);
            let granularity = pick(args.granularity, cfg.granularity, 400);
            let path = args
                .embeddings
                .as_ref()
                .ok_or_else(|| usage("--algo cw requires --embeddings"))?;
            let table = EmbeddingTable::load(path, scheme)
                .with_context(|| format!("reading {}", path.display()))?;
            let graph = build_ego_graph(&table, word, graph_size, granularity)?;
            let fit = chinese_whispers(&graph, CW_ITERATIONS, seed);
            meta.push(("embeddings", path.display().to_string()));
            meta.push(("word", word.clone()));
            meta.push(("graph_size", graph_size.to_string()));
            meta.push(("granularity", granularity.to_string()));
            meta.push(("seed", seed.to_string()));
            fit.assignment
        }
    };
    assignment
        .save(&args.output)
        .with_context(|| format!("writing {}", args.output.display()))?;
    write_meta(&args.output, "cluster", &meta)?;
    eprintln!(
        "cluster: {} {} words into {} clusters -> {}",
        algo,
        assignment.labels.len(),
        assignment.k,
        args.output.display()
    );
    Ok(())
}

#[derive(Args)]
struct AlignArgs {
    /// Source-side corpus, one sentence per line
    #[arg(long, value_name = "FILE")]
    source: PathBuf,
    /// Target-side corpus, line-aligned with the source
    #[arg(long, value_name = "FILE")]
    target: PathBuf,
    /// Translation-table destination
    #[arg(long, value_name = "FILE")]
    ttable: PathBuf,
    /// Also write Viterbi alignments in `i-j` format
    #[arg(long, value_name = "FILE")]
    alignments: Option<PathBuf>,
    /// EM iterations
    #[arg(long, value_name = "N")]
    iterations: Option<usize>,
    /// Initial diagonal tension
    #[arg(long, value_name = "L")]
    lambda0: Option<f64>,
    /// Probability mass reserved for unaligned words
    #[arg(long, value_name = "P")]
    p_null: Option<f64>,
    /// Keep the tension fixed instead of tuning it between iterations
    #[arg(long)]
    no_tension: bool,
    /// Keep only this many translations per source word ("all" keeps every
    /// one)
    #[arg(long, value_name = "N")]
    top_n: Option<String>,
}

fn run_align(args: AlignArgs, cfg: &PipelineConfig) -> Result<(), CliError> {
    let iterations = pick(args.iterations, cfg.iterations, 5);
    let lambda0 = pick(args.lambda0, cfg.lambda0, 4.0);
    let p_null = pick(args.p_null, cfg.p_null, 0.08);
    if iterations == 0 {
        return Err(usage("--iterations must be positive"));
    }
    if !(lambda0 >= 0.0) {
        return Err(usage("--lambda0 must be non-negative"));
    }
    if !(0.0..1.0).contains(&p_null) {
        return Err(usage("--p-null must be in [0, 1)"));
    }
    let top_n: TopN = pick(args.top_n, cfg.top_n.clone(), "all".to_string())
        .parse()
        .map_err(|e| usage(format!("--top-n: {e}")))?;
    let (parallel, skipped) = ParallelCorpus::from_paths(&args.source, &args.target)
        .with_context(|| {
            format!(
                "reading {} / {}",
                args.source.display(),
                args.target.display()
            )
        })?;
    let model = train_ibm2(&parallel, iterations, lambda0, p_null, !args.no_tension)?;
    let table = model.top_n_translations(top_n);
    table
        .save(&args.ttable)
        .with_context(|| format!("writing {}", args.ttable.display()))?;
    let meta = [
        ("source", args.source.display().to_string()),
        ("target", args.target.display().to_string()),
        ("iterations", iterations.to_string()),
        ("lambda0", format!("{lambda0}")),
        ("p_null", format!("{p_null}")),
        ("optimize_tension", (!args.no_tension).to_string()),
        ("top_n", top_n.to_string()),
    ];
    write_meta(&args.ttable, "align", &meta)?;
    if let Some(path) = &args.alignments {
        let mut out = Vec::new();
        write_alignments(&model, &parallel, &mut out)?;
        fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
        write_meta(path, "align", &meta)?;
    }
    let final_ll = model
        .log_likelihoods
        .last()
        .map(|l| format!("{l:.4}"))
        .unwrap_or_else(|| "n/a".into());
    eprintln!(
        "align: {} pairs ({} skipped), {} iterations, LL {}, lambda {:.4} -> {}",
        parallel.pairs.len(),
        skipped,
        iterations,
        final_ll,
        model.lambda,
        args.ttable.display()
    );
    Ok(())
}

#[derive(Args)]
struct BuildDictArgs {
    /// Builder: multi, sense, cl, or tr
    #[arg(long, value_name = "METHOD")]
    method: String,
    /// Dictionary destination
    #[arg(long = "out", value_name = "FILE")]
    output: PathBuf,
    /// Morphological lexicon, `<word>\t<analysis>|<analysis>…` (multi)
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,
    /// Embeddings trained on undiacritized text (sense)
    #[arg(long, value_name = "FILE")]
    embeddings: Option<PathBuf>,
    /// Diacritized corpus supplying the variant groups (cl, tr)
    #[arg(long, value_name = "FILE")]
    fullcm: Option<PathBuf>,
    /// Cluster assignment of diacritized variants (cl)
    #[arg(long, value_name = "FILE")]
    clusters: Option<PathBuf>,
    /// Translation table (tr)
    #[arg(long, value_name = "FILE")]
    ttable: Option<PathBuf>,
    /// Translations compared per variant (tr): a count or "all"
    #[arg(long, value_name = "N")]
    top_n: Option<String>,
    /// Neighborhood size (sense)
    #[arg(long, value_name = "N")]
    graph_size: Option<usize>,
    /// Edges kept per neighborhood node (sense)
    #[arg(long, value_name = "N")]
    granularity: Option<usize>,
    /// Smallest neighborhood cluster that counts as a sense (sense)
    #[arg(long, value_name = "N")]
    min_cluster: Option<usize>,
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
}

fn run_build_dict(
    args: BuildDictArgs,
    global: &Global,
    cfg: &PipelineConfig,
) -> Result<(), CliError> {
    let d = DiacriticSet::default();
    let mut meta: Vec<(&str, String)> = Vec::new();
    let mut extra_summary = String::new();
    let dict: AmbigDict = match args.method.to_ascii_lowercase().as_str() {
        "multi" => {
            let path = args
                .lexicon
                .as_ref()
                .ok_or_else(|| usage("--method multi requires --lexicon"))?;
            let lex = MorphLexicon::from_path(path, &d)?;
            meta.push(("lexicon", path.display().to_string()));
            build_multi(&lex)
        }
        "sense" => {
            let path = args
                .embeddings
                .as_ref()
                .ok_or_else(|| usage("--method sense requires --embeddings"))?;
            let seed = resolve_seed(args.seed, cfg.seed, global.deterministic, "build-dict")?;
            let graph_size = pick(args.graph_size, cfg.graph_size, 200);
            let granularity = pick(args.granularity, cfg.granularity, 400);
            let min_cluster = pick(args.min_cluster, cfg.min_cluster, 5);
            let table = EmbeddingTable::load(path, Scheme::None)
                .with_context(|| format!("reading {}", path.display()))?;
            meta.push(("embeddings", path.display().to_string()));
            build_sense(&table, graph_size, granularity, min_cluster, seed)?
        }
        "cl" => {
            let fullcm_path = args
                .fullcm
                .as_ref()
                .ok_or_else(|| usage("--method cl requires --fullcm"))?;
            let clusters_path = args
                .clusters
                .as_ref()
                .ok_or_else(|| usage("--method cl requires --clusters"))?;
            let fullcm = read_corpus(fullcm_path, Scheme::FullCm)?;
            let vm = build_variant_map(&fullcm, &d);
            let ca = ClusterAssignment::load(clusters_path)
                .with_context(|| format!("reading {}", clusters_path.display()))?;
            let (dict, uncovered) = build_cl(&vm, &ca)?;
            meta.push(("fullcm", fullcm_path.display().to_string()));
            meta.push(("clusters", clusters_path.display().to_string()));
            extra_summary = format!(", {} variants uncovered", uncovered.len());
            dict
        }
        "tr" => {
            let fullcm_path = args
                .fullcm
                .as_ref()
                .ok_or_else(|| usage("--method tr requires --fullcm"))?;
            let ttable_path = args
                .ttable
                .as_ref()
                .ok_or_else(|| usage("--method tr requires --ttable"))?;
            let top_n: TopN = pick(args.top_n, cfg.top_n.clone(), "all".to_string())
                .parse()
                .map_err(|e| usage(format!("--top-n: {e}")))?;
            let fullcm = read_corpus(fullcm_path, Scheme::FullCm)?;
            let vm = build_variant_map(&fullcm, &d);
            let tt = TranslationTable::load(ttable_path)?;
            meta.push(("fullcm", fullcm_path.display().to_string()));
            meta.push(("ttable", ttable_path.display().to_string()));
            build_tr(&vm, &tt, top_n)
        }
        other => {
            return Err(usage(format!(
                "--method: expected multi, sense, cl or tr, found {other:?}"
            )))
        }
    };
    dict.save(&args.output)
        .with_context(|| format!("writing {}", args.output.display()))?;
    meta.push(("method", dict.method.to_string()));
    meta.push(("keying", dict.keying.to_string()));
    for (k, v) in &dict.params {
        meta.push(("param", format!("{k}={v}")));
    }
    // params may repeat the `param` key; give each its own line
    let mut text = String::from("stage=build-dict\n");
    let mut lines: Vec<String> = meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
    lines.sort();
    for line in lines {
        text.push_str(&line);
        text.push('\n');
    }
    let mpath = meta_path(&args.output);
    fs::write(&mpath, text).with_context(|| format!("writing {}", mpath.display()))?;
    let stats = ambiguity_stats(&dict);
    eprintln!(
        "build-dict: {} {} types ({} ambiguous, {:.2}%){} -> {}",
        dict.method,
        stats.types,
        stats.ambiguous,
        stats.ambiguous_pct,
        extra_summary,
        args.output.display()
    );
    Ok(())
}

#[derive(Args)]
struct ApplyArgs {
    /// Ambiguity dictionary
    #[arg(long, value_name = "FILE")]
    dict: PathBuf,
    /// Diacritized corpus to filter
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Destination (stdout when omitted)
    #[arg(long = "out", value_name = "FILE")]
    output: Option<PathBuf>,
}

fn run_apply(args: ApplyArgs) -> Result<(), CliError> {
    let dict = AmbigDict::load(&args.dict)?;
    let fullcm = read_corpus(&args.input, Scheme::FullCm)?;
    let d = DiacriticSet::default();
    let selective = apply_selective(&fullcm, &d, &dict);
    write_corpus(&selective, args.output.as_deref())?;
    if let Some(out) = &args.output {
        write_meta(
            out,
            "apply",
            &[
                ("dict", args.dict.display().to_string()),
                ("input", args.input.display().to_string()),
                ("scheme", selective.scheme.to_string()),
                ("method", dict.method.to_string()),
                ("keying", dict.keying.to_string()),
            ],
        )?;
        eprintln!(
            "apply: {} sentences, scheme {} -> {}",
            selective.sentences.len(),
            selective.scheme,
            out.display()
        );
    }
    Ok(())
}

#[derive(Args)]
struct StatsArgs {
    /// Ambiguity dictionary to summarize
    #[arg(value_name = "DICT")]
    dict: PathBuf,
}

fn run_stats(args: StatsArgs) -> Result<(), CliError> {
    let dict = AmbigDict::load(&args.dict)?;
    let stats = ambiguity_stats(&dict);
    println!(
        "{}\t{}\t{:.2}",
        dict.method, stats.types, stats.ambiguous_pct
    );
    Ok(())
}

#[derive(Args)]
struct PatternsArgs {
    /// Diacritized corpus supplying the variant groups
    #[arg(long, value_name = "FILE")]
    fullcm: PathBuf,
    /// Variant-keyed ambiguity dictionary
    #[arg(long, value_name = "FILE")]
    dict: PathBuf,
    /// Destination (stdout when omitted)
    #[arg(long = "out", value_name = "FILE")]
    output: Option<PathBuf>,
}

fn run_patterns(args: PatternsArgs) -> Result<(), CliError> {
    let dict = AmbigDict::load(&args.dict)?;
    let fullcm = read_corpus(&args.fullcm, Scheme::FullCm)?;
    let d = DiacriticSet::default();
    let vm = build_variant_map(&fullcm, &d);
    let report = pattern_report(&vm, &d, &dict)?;
    match &args.output {
        Some(path) => {
            let mut out = Vec::new();
            report.write_to(&mut out)?;
            fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
            write_meta(
                path,
                "patterns",
                &[
                    ("fullcm", args.fullcm.display().to_string()),
                    ("dict", args.dict.display().to_string()),
                    ("method", dict.method.to_string()),
                ],
            )?;
            eprintln!(
                "patterns: {} contrasts ({} always kept) -> {}",
                report.tallies.len(),
                report.always_ambiguous().len(),
                path.display()
            );
        }
        None => {
            let stdout = std::io::stdout();
            report.write_to(&mut stdout.lock())?;
        }
    }
    Ok(())
}

#[derive(Args)]
struct EvalPosArgs {
    /// Tagged training corpus, `word/TAG` tokens
    #[arg(long, value_name = "FILE")]
    train: PathBuf,
    /// Tagged test corpus
    #[arg(long, value_name = "FILE")]
    test: PathBuf,
    /// Diacritization scheme of both corpora
    #[arg(long, value_name = "SCHEME")]
    scheme: String,
    /// Diacritized corpus for the homograph slice (its multi-variant
    /// spellings select the tokens)
    #[arg(long, value_name = "FILE")]
    fullcm_train: Option<PathBuf>,
    /// Also report per-tag accuracy for the open classes
    #[arg(long)]
    per_tag: bool,
    /// Training epochs
    #[arg(long, value_name = "N")]
    epochs: Option<usize>,
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Also write the accuracy lines to a file
    #[arg(long = "out", value_name = "FILE")]
    output: Option<PathBuf>,
}

fn run_eval_pos(args: EvalPosArgs, global: &Global, cfg: &PipelineConfig) -> Result<(), CliError> {
    let scheme = parse_scheme(&args.scheme, "--scheme")?;
    let seed = resolve_seed(args.seed, cfg.seed, global.deterministic, "eval-pos")?;
    let epochs = pick(args.epochs, cfg.epochs, 5);
    if epochs == 0 {
        return Err(usage("--epochs must be positive"));
    }
    let train = TaggedCorpus::from_path(&args.train, scheme.clone())?;
    let test = TaggedCorpus::from_path(&args.test, scheme.clone())?;
    let model = train_pos_tagger(&train, epochs, seed)?;
    let train_vocab: BTreeSet<String> = train
        .sentences
        .iter()
        .flatten()
        .map(|(w, _)| w.clone())
        .collect();
    let homograph_keys = match &args.fullcm_train {
        None => None,
        Some(path) => {
            let fullcm = read_corpus(path, Scheme::FullCm)?;
            let d = DiacriticSet::default();
            let vm = build_variant_map(&fullcm, &d);
            Some(vm.homograph_keys().cloned().collect::<BTreeSet<String>>())
        }
    };
    let spec = SliceSpec {
        homograph_keys,
        train_vocab: Some(train_vocab),
        per_tag: args.per_tag,
    };
    let eval = evaluate_tagger(&model, &test, &spec)?;
    let lines = eval.machine_lines();
    for line in &lines {
        println!("{line}");
    }
    if let Some(path) = &args.output {
        let mut text = lines.join("\n");
        text.push('\n');
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        write_meta(
            path,
            "eval-pos",
            &[
                ("train", args.train.display().to_string()),
                ("test", args.test.display().to_string()),
                ("scheme", scheme.to_string()),
                ("epochs", epochs.to_string()),
                ("seed", seed.to_string()),
            ],
        )?;
    }
    eprintln!(
        "eval-pos: {} train / {} test tokens, scheme {}, accuracy {:.4}",
        train.token_count(),
        test.token_count(),
        scheme,
        eval.overall.value()
    );
    Ok(())
}

#[derive(Args)]
struct BootstrapArgs {
    /// First score file, one number per line
    #[arg(value_name = "FILE_A")]
    a: PathBuf,
    /// Second score file, line-paired with the first
    #[arg(value_name = "FILE_B")]
    b: PathBuf,
    /// Bootstrap resamples
    #[arg(long, value_name = "N")]
    resamples: Option<usize>,
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
}

fn read_scores(path: &Path) -> Result<Vec<f64>, CliError> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut scores = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            CliError::Data(anyhow::anyhow!(
                "{}: line {}: expected a number, found {line:?}",
                path.display(),
                no + 1
            ))
        })?;
        scores.push(v);
    }
    Ok(scores)
}

fn run_bootstrap(args: BootstrapArgs, global: &Global, cfg: &PipelineConfig) -> Result<(), CliError> {
    let seed = resolve_seed(args.seed, cfg.seed, global.deterministic, "bootstrap")?;
    let resamples = pick(args.resamples, cfg.resamples, 10_000);
    if resamples == 0 {
        return Err(usage("--resamples must be positive"));
    }
    let a = read_scores(&args.a)?;
    let b = read_scores(&args.b)?;
    let p = paired_bootstrap(&a, &b, resamples, seed)?;
    println!("p\t{p:.6}");
    eprintln!(
        "bootstrap: {} pairs, {} resamples, p = {:.6}",
        a.len(),
        resamples,
        p
    );
    Ok(())
}
