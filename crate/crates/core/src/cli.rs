//! `hashrank` command line.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;

use crate::classifier::train_domain_classifier;
use crate::config::{RunConfig, TimeRef};
use crate::corpus::{
    extract_hashtags, load_microblogs, load_news_corpus, read_jsonl, write_jsonl, HashtagStyle,
};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, format_report, load_annotations, Prediction};
use crate::persist::{load_classifier, save_classifier};
use crate::pipeline::{format_table, rank_posts, RankOptions, CLASSIFICATIONS_FILE};
use crate::ranking::SECONDS_PER_DAY;
use crate::synth::{generate_annotations, generate_microblogs, generate_news};

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Parser)]
#[command(
    name = "hashrank",
    version,
    about = "Classify microblog hashtags into news domains and rank them"
)]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(flatten)]
    pub overrides: Overrides,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the domain classifier from the news corpus.
    Train,
    /// Classify and rank hashtags from the microblog stream.
    Rank {
        /// Print the ranking table to stdout.
        #[arg(long)]
        table: bool,
        /// Write per-hashtag clustering diagnostics.
        #[arg(long)]
        diagnostics: bool,
    },
    /// Score a rank run against annotations.
    Eval {
        /// Print the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Generate a synthetic news corpus, microblog stream, truth and annotations.
    Synth(SynthArgs),
    /// Print the hashtags found in each argument (or each stdin line) as JSON.
    Extract {
        #[arg(long, value_name = "weibo|twitter")]
        style: Option<HashtagStyle>,
        text: Vec<String>,
    },
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true, value_name = "PATH")]
    pub news: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    pub microblogs: Option<PathBuf>,
    #[arg(long, global = true, value_name = "DIR")]
    pub model_dir: Option<PathBuf>,
    #[arg(long, global = true, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    pub annotations: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    pub truth: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub min_df: Option<usize>,
    #[arg(long, global = true)]
    pub max_df_ratio: Option<f64>,
    #[arg(long, global = true)]
    pub topics: Option<usize>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub train_iters: Option<usize>,
    #[arg(long, global = true)]
    pub infer_iters: Option<usize>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    #[arg(long, global = true)]
    pub gamma_days: Option<f64>,
    /// Reference time: epoch seconds or "now".
    #[arg(long, global = true, value_name = "SECONDS|now")]
    pub t_p: Option<TimeRef>,
    #[arg(long, global = true)]
    pub top_k: Option<usize>,
    #[arg(long, global = true)]
    pub eval_k: Option<usize>,
    /// Link posts only when strictly closer than the threshold.
    #[arg(long, global = true)]
    pub strict: bool,
    #[arg(long, global = true)]
    pub subsample_cap: Option<usize>,
    #[arg(long, global = true)]
    pub min_posts: Option<usize>,
    #[arg(long, global = true, value_name = "weibo|twitter")]
    pub hashtag_style: Option<HashtagStyle>,
}

#[derive(Debug, Default, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n_domains: Option<usize>,
    #[arg(long)]
    pub docs_per_domain: Option<usize>,
    #[arg(long)]
    pub vocab_per_domain: Option<usize>,
    #[arg(long)]
    pub overlap_ratio: Option<f64>,
    #[arg(long)]
    pub doc_len: Option<usize>,
    #[arg(long)]
    pub n_hashtags: Option<usize>,
    #[arg(long)]
    pub posts_per_hashtag: Option<usize>,
    #[arg(long)]
    pub post_len: Option<usize>,
    #[arg(long)]
    pub spam_ratio: Option<f64>,
    #[arg(long)]
    pub time_span_days: Option<f64>,
    #[arg(long)]
    pub end_time: Option<i64>,
}

macro_rules! set {
    ($target:expr, $value:expr) => {
        if let Some(v) = $value {
            $target = v;
        }
    };
}

impl Overrides {
    pub fn apply(&self, c: &mut RunConfig) {
        set!(c.paths.news, self.news.clone());
        set!(c.paths.microblogs, self.microblogs.clone());
        set!(c.paths.model_dir, self.model_dir.clone());
        set!(c.paths.output_dir, self.output_dir.clone());
        set!(c.paths.annotations, self.annotations.clone());
        set!(c.paths.truth, self.truth.clone());
        set!(c.seed, self.seed);
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        set!(c.features.min_df, self.min_df);
        set!(c.features.max_df_ratio, self.max_df_ratio);
        set!(c.features.n_topics, self.topics);
        if self.alpha.is_some() {
            c.features.alpha = self.alpha;
        }
        set!(c.features.beta, self.beta);
        set!(c.features.train_iters, self.train_iters);
        set!(c.features.infer_iters, self.infer_iters);
        set!(c.svm.lambda, self.lambda);
        set!(c.svm.epochs, self.epochs);
        set!(c.ranking.gamma_days, self.gamma_days);
        if self.t_p.is_some() {
            c.ranking.t_p = self.t_p;
        }
        set!(c.ranking.top_k, self.top_k);
        set!(c.evaluation.k, self.eval_k);
        if self.strict {
            c.clustering.strict = true;
        }
        set!(c.clustering.subsample_cap, self.subsample_cap);
        set!(c.corpus.min_posts, self.min_posts);
        set!(c.corpus.hashtag_style, self.hashtag_style);
    }
}

impl SynthArgs {
    pub fn apply(&self, c: &mut RunConfig) {
        let s = &mut c.synth;
        set!(s.n_domains, self.n_domains);
        set!(s.docs_per_domain, self.docs_per_domain);
        set!(s.vocab_per_domain, self.vocab_per_domain);
        set!(s.overlap_ratio, self.overlap_ratio);
        set!(s.doc_len, self.doc_len);
        set!(s.n_hashtags, self.n_hashtags);
        set!(s.posts_per_hashtag, self.posts_per_hashtag);
        set!(s.post_len, self.post_len);
        set!(s.spam_ratio, self.spam_ratio);
        set!(s.time_span_days, self.time_span_days);
        set!(s.end_time, self.end_time);
    }
}

/// Resolve the effective configuration: defaults, then the config file, then flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg);
    if let Command::Synth(args) = &cli.command {
        args.apply(&mut cfg);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p).map_err(|e| Error::io(p, e)),
        _ => Ok(()),
    }
}

pub fn cmd_train(cfg: &RunConfig) -> Result<()> {
    let corpus = load_news_corpus(&cfg.paths.news)?;
    info!(
        "loaded {} articles in {} categories",
        corpus.articles.len(),
        corpus.labels.len()
    );
    let clf = train_domain_classifier(&corpus.articles, &cfg.train_config())?;
    save_classifier(&cfg.paths.model_dir, &clf)?;
    info!("model written to {}", cfg.paths.model_dir.display());
    Ok(())
}

pub fn rank_options(cfg: &RunConfig) -> RankOptions {
    RankOptions {
        gamma_seconds: cfg.ranking.gamma_days * SECONDS_PER_DAY,
        t_p: cfg.ranking.t_p.map(TimeRef::resolve),
        top_k: cfg.ranking.top_k,
        min_posts: cfg.corpus.min_posts,
        semantic: cfg.semantic_options(),
        workers: cfg.workers,
    }
}

/// Returns the ranking table text.
pub fn cmd_rank(cfg: &RunConfig, diagnostics: bool) -> Result<String> {
    let clf = load_classifier(&cfg.paths.model_dir)?;
    let posts = load_microblogs(&cfg.paths.microblogs, cfg.corpus.hashtag_style)?;
    info!("loaded {} microblogs", posts.len());
    let run = rank_posts(&posts, &clf, &rank_options(cfg))?;
    run.write_outputs(&cfg.paths.output_dir, diagnostics)?;
    info!("rankings written to {}", cfg.paths.output_dir.display());
    Ok(format_table(&run.ranking_records()))
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<crate::evaluation::MetricReport> {
    let path = cfg.paths.output_dir.join(CLASSIFICATIONS_FILE);
    let predictions: Vec<Prediction> = read_jsonl(&path)?;
    let annotations = load_annotations(&cfg.paths.annotations)?;
    let report = evaluate(&predictions, &annotations, cfg.evaluation.k)?;
    let out = cfg.paths.output_dir.join(REPORT_FILE);
    let mut bytes = serde_json::to_vec_pretty(&report)?;
    bytes.push(b'\n');
    fs::write(&out, bytes).map_err(|e| Error::io(&out, e))?;
    Ok(report)
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<()> {
    let synth = cfg.synth_config();
    let news = generate_news(&synth)?;
    let stream = generate_microblogs(&synth, &synth.domains())?;
    let annotations = generate_annotations(&synth, &stream);
    let paths = &cfg.paths;
    for path in [
        &paths.news,
        &paths.microblogs,
        &paths.truth,
        &paths.annotations,
    ] {
        create_parent(path)?;
    }
    write_jsonl(&paths.news, &news)?;
    write_jsonl(&paths.microblogs, &stream.posts)?;
    write_jsonl(&paths.truth, &stream.truth)?;
    write_jsonl(&paths.annotations, &annotations)?;
    info!(
        "wrote {} articles, {} posts, {} hashtags",
        news.len(),
        stream.posts.len(),
        stream.truth.len()
    );
    Ok(())
}

fn cmd_extract(style: HashtagStyle, texts: &[String], out: &mut impl Write) -> Result<()> {
    let emit = |text: &str, out: &mut dyn Write| -> Result<()> {
        let tags = extract_hashtags(text, style);
        serde_json::to_writer(&mut *out, &tags)?;
        writeln!(out).map_err(|e| Error::io("<stdout>", e))
    };
    if texts.is_empty() {
        for line in io::stdin().lock().lines() {
            emit(&line.map_err(|e| Error::io("<stdin>", e))?, out)?;
        }
    } else {
        for t in texts {
            emit(t, out)?;
        }
    }
    Ok(())
}

/// Run a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let level = if cli.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .try_init();

    let result = resolve_config(&cli).and_then(|cfg| {
        let stdout = io::stdout();
        let mut out = stdout.lock();
        let write_err = |e| Error::io("<stdout>", e);
        match &cli.command {
            Command::Train => cmd_train(&cfg),
            Command::Rank { table, diagnostics } => {
                let text = cmd_rank(&cfg, *diagnostics)?;
                if *table {
                    out.write_all(text.as_bytes()).map_err(write_err)?;
                }
                Ok(())
            }
            Command::Eval { json } => {
                let report = cmd_eval(&cfg)?;
                if *json {
                    serde_json::to_writer_pretty(&mut out, &report)?;
                    writeln!(out).map_err(write_err)
                } else {
                    out.write_all(format_report(&report).as_bytes())
                        .map_err(write_err)
                }
            }
            Command::Synth(_) => cmd_synth(&cfg),
            Command::Extract { style, text } => {
                cmd_extract(style.unwrap_or(cfg.corpus.hashtag_style), text, &mut out)
            }
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    run(Cli::parse())
}
