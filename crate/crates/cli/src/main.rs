//! `relex`: command-line front end for the relation-extraction pipeline.
//!
//! Exit status: 0 on success, 1 when a check or a pipeline stage fails, 2 on
//! usage errors (bad flags, unreadable or malformed config).

mod commands;

use std::ops::Range;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relex_core::config::{relation_preset, ClassifierKind, PipelineConfig};
use relex_core::evaluation::EvalLevel;

#[derive(Debug, Parser)]
#[command(name = "relex", version, about = "N-ary cross-sentence relation extraction with a constrained subsequence kernel")]
struct Cli {
    /// TOML or JSON pipeline config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for kernel evaluation (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a corpus file and print a per-document report.
    ValidateCorpus {
        #[arg(long)]
        corpus: PathBuf,
        /// Also type-check gold annotations of this relation preset.
        #[arg(long)]
        relation: Option<String>,
    },
    /// Emit filtered candidates with span, minimal span and gold label.
    GenCandidates {
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cluster corpus words by embedding similarity.
    Cluster {
        #[arg(long)]
        embeddings: PathBuf,
        #[command(flatten)]
        input: CorpusArgs,
        #[arg(long)]
        min_freq: Option<usize>,
        /// Cosine-distance cut for complete linkage.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        stopwords: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the sequence representation of every filtered candidate.
    BuildSeqs {
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a classifier and write the model file.
    Train {
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        classifier: ClassifierArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label the candidates of a corpus with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score predictions against the corpus gold annotations.
    Eval {
        #[arg(long)]
        predictions: PathBuf,
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long, value_enum, default_value_t = Level::Rigd)]
        level: Level,
        /// Write the full-precision JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// K-fold train/test over contiguous document blocks, metrics averaged.
    Crossval {
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        classifier: ClassifierArgs,
        #[arg(long, default_value_t = 2)]
        folds: usize,
        #[arg(long, value_enum, default_value_t = Level::Rigd)]
        level: Level,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Compare the kernel dynamic programs with brute-force enumeration.
    KernelCheck {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        #[arg(long, default_value_t = 0.9)]
        lambda: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Generate a synthetic Lives_In corpus with a planted cue pattern.
    Synth {
        #[arg(long, default_value_t = 200)]
        docs: usize,
        /// Defaults to the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        positive_rate: Option<f64>,
        #[arg(long)]
        alias_rate: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the effective config and the relation presets.
    Config {
        /// Print built-in defaults, ignoring --config.
        #[arg(long)]
        defaults: bool,
    },
}

#[derive(Debug, Args)]
struct CorpusArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Half-open document index range such as `0..100`, `100..` or `..50`.
    #[arg(long, value_parser = parse_range)]
    doc_range: Option<Range<usize>>,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    /// Relation preset: Succession, Lives_In or Interact.
    #[arg(long)]
    relation: Option<String>,
    #[arg(long)]
    max_minimal_span: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    n_prime: Option<usize>,
    /// Word-to-cluster JSON from `cluster`.
    #[arg(long)]
    clusters: Option<PathBuf>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ClassifierArgs {
    #[arg(long, value_enum)]
    classifier: Option<Classifier>,
    /// SVM box constraint.
    #[arg(long)]
    c: Option<f64>,
    /// MaxEnt L2 strength.
    #[arg(long)]
    l2: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Classifier {
    Svm,
    Maxent,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Level {
    Rigd,
    Mention,
}

impl From<Level> for EvalLevel {
    fn from(l: Level) -> Self {
        match l {
            Level::Rigd => EvalLevel::Rigd,
            Level::Mention => EvalLevel::Mention,
        }
    }
}

fn parse_range(s: &str) -> Result<Range<usize>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected START..END, got '{s}'"))?;
    let num = |x: &str, default: usize| -> Result<usize, String> {
        if x.is_empty() {
            Ok(default)
        } else {
            x.parse().map_err(|_| format!("'{x}' is not a document index"))
        }
    };
    let (start, end) = (num(a, 0)?, num(b, usize::MAX)?);
    if start > end {
        return Err(format!("empty range {s}"));
    }
    Ok(start..end)
}

/// Marks errors that map to exit status 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl std::fmt::Display) -> anyhow::Error {
    UsageError(msg.to_string()).into()
}

impl PipelineArgs {
    fn apply(&self, cfg: &mut PipelineConfig) -> anyhow::Result<()> {
        if let Some(name) = &self.relation {
            cfg.relation = relation_preset(name).map_err(usage)?;
        }
        if let Some(k) = self.max_minimal_span {
            cfg.relation.max_minimal_span = k;
        }
        if let Some(l) = self.lambda {
            cfg.kernel.lambda = l;
        }
        if let Some(n) = self.n_prime {
            cfg.kernel.n_prime = n;
        }
        if let Some(p) = &self.clusters {
            cfg.clusters.path = Some(p.clone());
        }
        if let Some(p) = &self.stopwords {
            cfg.stopwords = Some(p.clone());
        }
        Ok(())
    }
}

impl ClassifierArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(c) = self.classifier {
            cfg.classifier = match c {
                Classifier::Svm => ClassifierKind::Svm,
                Classifier::Maxent => ClassifierKind::Maxent,
            };
        }
        if let Some(c) = self.c {
            cfg.svm.c = c;
        }
        if let Some(l2) = self.l2 {
            cfg.maxent.l2 = l2;
        }
    }
}

/// Defaults, then the config file, then `adjust` for flag overrides.
fn resolve_config(cli: &Cli, adjust: impl FnOnce(&mut PipelineConfig) -> anyhow::Result<()>) -> anyhow::Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path).map_err(usage)?,
        None => PipelineConfig::default(),
    };
    adjust(&mut cfg)?;
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Some(n) = cli.threads {
        relex_core::set_threads(n).map_err(usage)?;
    }
    match &cli.command {
        Command::ValidateCorpus { corpus, relation } => commands::validate(corpus, relation.as_deref()),
        Command::GenCandidates { input, pipeline, out } => {
            let cfg = resolve_config(&cli, |c| pipeline.apply(c))?;
            commands::gen_candidates(&cfg, &input.corpus, input.doc_range.clone(), out.as_deref())
        }
        Command::Cluster {
            embeddings,
            input,
            min_freq,
            threshold,
            stopwords,
            out,
        } => {
            let cfg = resolve_config(&cli, |c| {
                if let Some(k) = min_freq {
                    c.clusters.min_freq = *k;
                }
                if let Some(t) = threshold {
                    c.clusters.distance_threshold = *t;
                }
                if let Some(p) = stopwords {
                    c.stopwords = Some(p.clone());
                }
                Ok(())
            })?;
            commands::cluster(&cfg, embeddings, &input.corpus, input.doc_range.clone(), out.as_deref())
        }
        Command::BuildSeqs { input, pipeline, out } => {
            let cfg = resolve_config(&cli, |c| pipeline.apply(c))?;
            commands::build_seqs(&cfg, &input.corpus, input.doc_range.clone(), out.as_deref())
        }
        Command::Train {
            input,
            pipeline,
            classifier,
            out,
        } => {
            let cfg = resolve_config(&cli, |c| {
                pipeline.apply(c)?;
                classifier.apply(c);
                Ok(())
            })?;
            commands::train(&cfg, &input.corpus, input.doc_range.clone(), out)
        }
        Command::Predict {
            model,
            input,
            pipeline,
            out,
        } => {
            let model = relex_core::pipeline::ModelFile::load(model)?;
            let relation = model.relation.clone();
            let cfg = resolve_config(&cli, |c| {
                // The model's relation unless the caller asks for another.
                c.relation = relation;
                pipeline.apply(c)
            })?;
            commands::predict(&cfg, &model, &input.corpus, input.doc_range.clone(), out.as_deref())
        }
        Command::Eval {
            predictions,
            input,
            pipeline,
            level,
            json,
        } => {
            let cfg = resolve_config(&cli, |c| pipeline.apply(c))?;
            commands::eval(&cfg, predictions, &input.corpus, input.doc_range.clone(), (*level).into(), json.as_deref())
        }
        Command::Crossval {
            input,
            pipeline,
            classifier,
            folds,
            level,
            json,
        } => {
            if *folds < 2 {
                return Err(usage("--folds must be at least 2"));
            }
            let cfg = resolve_config(&cli, |c| {
                pipeline.apply(c)?;
                classifier.apply(c);
                Ok(())
            })?;
            commands::crossval(&cfg, &input.corpus, input.doc_range.clone(), *folds, (*level).into(), json.as_deref())
        }
        Command::KernelCheck {
            trials,
            max_len,
            lambda,
            seed,
            tolerance,
        } => commands::kernel_check(*trials, *max_len, *lambda, *seed, *tolerance),
        Command::Synth {
            docs,
            seed,
            positive_rate,
            alias_rate,
            out,
        } => {
            let cfg = resolve_config(&cli, |_| Ok(()))?;
            let mut spec = relex_core::synth::SynthSpec {
                docs: *docs,
                seed: seed.unwrap_or(cfg.seed),
                ..Default::default()
            };
            if let Some(p) = positive_rate {
                spec.positive_rate = *p;
            }
            if let Some(a) = alias_rate {
                spec.alias_rate = *a;
            }
            for (name, v) in [("--positive-rate", spec.positive_rate), ("--alias-rate", spec.alias_rate)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(usage(format!("{name} must lie in [0, 1], got {v}")));
                }
            }
            commands::synth(&spec, out.as_deref())
        }
        Command::Config { defaults } => {
            let cfg = if *defaults {
                PipelineConfig::default()
            } else {
                resolve_config(&cli, |_| Ok(()))?
            };
            commands::print_config(&cfg)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
