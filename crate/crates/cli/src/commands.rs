use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use relex_core::candidates::{filter_candidates, generate_candidates, label_candidates, with_spans, Label};
use relex_core::clusters::{cluster_words, load_embeddings, vocabulary};
use relex_core::config::{dump_defaults, relation_preset, PipelineConfig};
use relex_core::corpus::{alias_closure, load_corpus, validate_corpus, write_corpus, Corpus};
use relex_core::evaluation::{average_folds, format_table, EvalLevel, EvalReport};
use relex_core::kernel::check::run_oracle_check;
use relex_core::pipeline::{self, ModelFile, Prediction, Resources};
use relex_core::synth::{synth_corpus, SynthSpec};

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_jsonl<T: Serialize>(out: &mut dyn Write, items: impl IntoIterator<Item = T>) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut *out, &item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = output(Some(path))?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn corpus(cfg: &PipelineConfig, path: &Path, range: Option<Range<usize>>) -> Result<Corpus> {
    let corpus = load_corpus(path, &cfg.relation.signature()?)
        .with_context(|| format!("loading corpus {}", path.display()))?;
    Ok(match range {
        Some(r) => corpus.slice(r),
        None => corpus,
    })
}

pub fn validate(path: &Path, relation: Option<&str>) -> Result<ExitCode> {
    let signature = match relation {
        Some(name) => Some(
            relation_preset(name)
                .map_err(crate::usage)?
                .signature()?,
        ),
        None => None,
    };
    let validation = validate_corpus(path, signature.as_ref())
        .with_context(|| format!("reading {}", path.display()))?;
    for report in &validation.reports {
        println!("{report}");
    }
    let bad = validation.reports.iter().filter(|r| !r.is_ok()).count();
    println!("{} documents, {} with issues", validation.reports.len(), bad);
    Ok(if validation.is_ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn gen_candidates(cfg: &PipelineConfig, path: &Path, range: Option<Range<usize>>, out: Option<&Path>) -> Result<ExitCode> {
    let corpus = corpus(cfg, path, range)?;
    let signature = cfg.relation.signature()?;
    let mut w = output(out)?;
    let (mut kept, mut dropped) = (0, 0);
    for doc in &corpus.documents {
        let groups = alias_closure(&doc.entities, cfg.relation.alias_rules);
        let gold: Vec<_> = doc.gold(&cfg.relation.name).cloned().collect();
        let labelled = label_candidates(generate_candidates(doc, &groups, &signature), &gold, &groups);
        let spanned = with_spans(labelled, &doc.document, &groups);
        let total = spanned.len();
        let filtered = filter_candidates(spanned, cfg.relation.max_minimal_span);
        kept += filtered.len();
        dropped += total - filtered.len();
        write_jsonl(&mut w, filtered)?;
    }
    w.flush()?;
    log::info!(
        "{kept} candidates kept, {dropped} over minimal span {}",
        cfg.relation.max_minimal_span
    );
    Ok(ExitCode::SUCCESS)
}

pub fn cluster(
    cfg: &PipelineConfig,
    embeddings: &Path,
    corpus_path: &Path,
    range: Option<Range<usize>>,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let corpus = corpus(cfg, corpus_path, range)?;
    let table = load_embeddings(embeddings).with_context(|| format!("loading {}", embeddings.display()))?;
    let resources = Resources::load(&PipelineConfig {
        clusters: Default::default(),
        ..cfg.clone()
    })?;
    let vocab = vocabulary(&corpus, &resources.stopwords, cfg.clusters.min_freq);
    let assignment = cluster_words(&table, &vocab, cfg.clusters.distance_threshold);
    log::info!(
        "{} words in {} clusters; {} without embeddings, {} with zero vectors",
        assignment.clusters.len(),
        assignment.members().len(),
        assignment.missing.len(),
        assignment.zero_norm.len()
    );
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, &assignment.clusters)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

pub fn build_seqs(cfg: &PipelineConfig, path: &Path, range: Option<Range<usize>>, out: Option<&Path>) -> Result<ExitCode> {
    let corpus = corpus(cfg, path, range)?;
    let prepared = pipeline::prepare_corpus(&corpus, cfg, &Resources::load(cfg)?)?;
    let mut w = output(out)?;
    write_jsonl(&mut w, prepared.instances.iter().map(|i| &i.sequence))?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

pub fn train(cfg: &PipelineConfig, path: &Path, range: Option<Range<usize>>, out: &Path) -> Result<ExitCode> {
    let corpus = corpus(cfg, path, range)?;
    let prepared = pipeline::prepare_corpus(&corpus, cfg, &Resources::load(cfg)?)?;
    let positives = prepared.labels().iter().filter(|l| l.is_positive()).count();
    log::info!(
        "training {:?} on {} candidates ({} positive) from {} documents",
        cfg.classifier,
        prepared.instances.len(),
        positives,
        corpus.len()
    );
    let model = pipeline::train(&prepared, cfg)?;
    write_json(out, &model)?;
    Ok(ExitCode::SUCCESS)
}

pub fn predict(
    cfg: &PipelineConfig,
    model: &ModelFile,
    path: &Path,
    range: Option<Range<usize>>,
    out: Option<&Path>,
) -> Result<ExitCode> {
    model.check_compatible(&cfg.relation)?;
    let corpus = corpus(cfg, path, range)?;
    let prepared = pipeline::prepare_corpus(&corpus, cfg, &Resources::load(cfg)?)?;
    let predictions = pipeline::predict(model, &prepared)?;
    let mut w = output(out)?;
    write_jsonl(&mut w, &predictions)?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p: Prediction = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}: malformed prediction", path.display(), i + 1))?;
        out.push(p);
    }
    Ok(out)
}

pub fn eval(
    cfg: &PipelineConfig,
    predictions: &Path,
    path: &Path,
    range: Option<Range<usize>>,
    level: EvalLevel,
    json: Option<&Path>,
) -> Result<ExitCode> {
    let corpus = corpus(cfg, path, range)?;
    let prepared = pipeline::prepare_corpus(&corpus, cfg, &Resources::load(cfg)?)?;
    let mut by_key: BTreeMap<(String, Vec<String>), Prediction> = BTreeMap::new();
    for p in read_predictions(predictions)? {
        if p.candidate.label.is_none() {
            bail!("prediction for {} {:?} has no label", p.candidate.doc_id, p.candidate.arg_entity_ids);
        }
        by_key.insert((p.candidate.doc_id.clone(), p.candidate.arg_entity_ids.clone()), p);
    }
    // Align with the corpus candidates; anything not predicted is negative.
    let aligned: Vec<Prediction> = prepared
        .instances
        .iter()
        .map(|inst| {
            let key = (inst.candidate.doc_id.clone(), inst.candidate.arg_entity_ids.clone());
            by_key.remove(&key).unwrap_or_else(|| {
                let mut candidate = inst.candidate.clone();
                candidate.label = Some(Label::Negative);
                Prediction { candidate, score: 0.0 }
            })
        })
        .collect();
    if !by_key.is_empty() {
        log::warn!("{} predictions do not match any candidate of the corpus and are ignored", by_key.len());
    }
    let report = pipeline::evaluate(level, &aligned, &prepared)?;
    print!("{}", format_table(&[(level_name(level), &report)]));
    if let Some(p) = json {
        write_json(p, &report)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn level_name(level: EvalLevel) -> &'static str {
    match level {
        EvalLevel::Rigd => "rigd",
        EvalLevel::Mention => "mention",
    }
}

pub fn crossval(
    cfg: &PipelineConfig,
    path: &Path,
    range: Option<Range<usize>>,
    folds: usize,
    level: EvalLevel,
    json: Option<&Path>,
) -> Result<ExitCode> {
    let corpus = corpus(cfg, path, range)?;
    if corpus.len() < folds {
        bail!("{} documents cannot be split into {folds} folds", corpus.len());
    }
    let resources = Resources::load(cfg)?;
    let n = corpus.len();
    let mut reports: Vec<EvalReport> = Vec::with_capacity(folds);
    for k in 0..folds {
        let test_range = k * n / folds..(k + 1) * n / folds;
        let test = corpus.slice(test_range.clone());
        let mut train = corpus.slice(0..test_range.start);
        train.documents.extend(corpus.slice(test_range.end..n).documents);
        log::info!("fold {}: training on {} documents, testing on {}", k + 1, train.len(), test.len());
        let (_, report) = pipeline::train_and_evaluate(&train, &test, cfg, &resources, level)?;
        reports.push(report);
    }
    let names: Vec<String> = (1..=folds).map(|k| format!("fold {k}")).collect();
    let rows: Vec<(&str, &EvalReport)> = names.iter().map(String::as_str).zip(&reports).collect();
    print!("{}", format_table(&rows));
    let avg = average_folds(reports)?;
    match avg.accuracy {
        Some(a) => println!(
            "mean: P {:.1} R {:.1} F {:.1} Acc {:.1}",
            100.0 * avg.precision,
            100.0 * avg.recall,
            100.0 * avg.f1,
            100.0 * a
        ),
        None => println!(
            "mean: P {:.1} R {:.1} F {:.1}",
            100.0 * avg.precision,
            100.0 * avg.recall,
            100.0 * avg.f1
        ),
    }
    if let Some(p) = json {
        write_json(p, &avg)?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn kernel_check(trials: usize, max_len: usize, lambda: f64, seed: u64, tolerance: f64) -> Result<ExitCode> {
    let report = run_oracle_check(trials, max_len, lambda, seed, tolerance).map_err(crate::usage)?;
    println!(
        "{} trials, {} comparisons, max abs deviation {:.3e}, max rel deviation {:.3e}, {} failures (tolerance {:.0e})",
        report.trials,
        report.comparisons,
        report.max_abs_deviation,
        report.max_rel_deviation,
        report.failures,
        report.tolerance
    );
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn synth(spec: &SynthSpec, out: Option<&Path>) -> Result<ExitCode> {
    let s = synth_corpus(spec);
    log::info!(
        "{} documents, {} of {} candidate groups positive",
        s.corpus.len(),
        s.stats.positive_groups,
        s.stats.candidate_groups
    );
    let mut w = output(out)?;
    write_corpus(&s.corpus, &mut w)?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

pub fn print_config(cfg: &PipelineConfig) -> Result<ExitCode> {
    if *cfg == PipelineConfig::default() {
        print!("{}", dump_defaults());
    } else {
        print!("{}", cfg.to_toml());
    }
    Ok(ExitCode::SUCCESS)
}
