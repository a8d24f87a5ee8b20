//! End-to-end stages shared by the command-line tool and the tests.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::candidates::{
    filter_candidates, generate_candidates, label_candidates, with_spans, CandidateRelationInstance, Label,
};
use crate::classifiers::{
    class_balance_weights, extract_features, predict_maxent, train_maxent, train_svm, ClassifierError,
    FeatureVector, MaxEntModel, SvmModel, MODEL_VERSION,
};
use crate::clusters::ClusterMap;
use crate::config::{ClassifierKind, PipelineConfig, RelationConfig};
use crate::corpus::{alias_closure, AliasGroups, Corpus, CorpusDocument, CorpusError};
use crate::evaluation::{evaluate_mention, evaluate_rigd, EvalError, EvalLevel, EvalReport};
use crate::seqrep::{build_sequence, SeqError, SequenceRepresentation, Stopwords};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed {what} in {path}: {source}")]
    Json {
        what: &'static str,
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Sequence(#[from] SeqError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Evaluation(#[from] EvalError),
    #[error("model was trained for {model} ({model_arity} arguments) but the config targets {config} ({config_arity})")]
    Incompatible {
        model: String,
        model_arity: usize,
        config: String,
        config_arity: usize,
    },
    #[error("unsupported model version {0}")]
    Version(u32),
    #[error("no candidates to train on")]
    NoCandidates,
}

/// Cluster map and stopword list named by the config.
#[derive(Debug, Clone, Default)]
pub struct Resources {
    pub clusters: ClusterMap,
    pub stopwords: Stopwords,
}

impl Resources {
    pub fn load(config: &PipelineConfig) -> Result<Self, PipelineError> {
        fn io(path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
            move |source| PipelineError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
        let clusters = match &config.clusters.path {
            Some(path) => {
                let file = File::open(path).map_err(io(path))?;
                serde_json::from_reader(BufReader::new(file)).map_err(|source| PipelineError::Json {
                    what: "cluster map",
                    path: path.clone(),
                    source,
                })?
            }
            None => ClusterMap::new(),
        };
        let stopwords = match &config.stopwords {
            Some(path) => {
                let file = File::open(path).map_err(io(path))?;
                Stopwords::from_reader(BufReader::new(file)).map_err(io(path))?
            }
            None => Stopwords::default(),
        };
        Ok(Resources { clusters, stopwords })
    }
}

/// One filtered candidate with everything the classifiers need. The
/// candidate's label is the gold label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub candidate: CandidateRelationInstance,
    pub minimal_span: usize,
    pub sequence: SequenceRepresentation,
    pub features: FeatureVector,
}

#[derive(Debug, Clone, Default)]
pub struct PreparedCorpus {
    pub instances: Vec<Instance>,
    pub alias_groups: BTreeMap<String, AliasGroups>,
    /// Gold tuples of the configured relation.
    pub gold: Vec<CandidateRelationInstance>,
    /// Candidates dropped by the minimal-span filter.
    pub filtered: usize,
    /// Of those, the ones that were positive.
    pub filtered_positive: usize,
}

impl PreparedCorpus {
    pub fn labels(&self) -> Vec<Label> {
        self.instances
            .iter()
            .map(|i| i.candidate.label.unwrap_or(Label::Negative))
            .collect()
    }

    pub fn sequences(&self) -> Vec<SequenceRepresentation> {
        self.instances.iter().map(|i| i.sequence.clone()).collect()
    }
}

/// Candidates, labels, sequences and features for one document.
pub fn prepare_document(
    doc: &CorpusDocument,
    relation: &RelationConfig,
    resources: &Resources,
) -> Result<(AliasGroups, Vec<Instance>, usize, usize), PipelineError> {
    let signature = relation.signature()?;
    let groups = alias_closure(&doc.entities, relation.alias_rules);
    let gold: Vec<_> = doc.gold(&relation.name).cloned().collect();
    let candidates = label_candidates(generate_candidates(doc, &groups, &signature), &gold, &groups);
    let spanned = with_spans(candidates, &doc.document, &groups);
    let before = spanned.len();
    let positives_before = spanned.iter().filter(|c| c.candidate.label == Some(Label::Positive)).count();
    let kept = filter_candidates(spanned, relation.max_minimal_span);
    let positives_after = kept.iter().filter(|c| c.candidate.label == Some(Label::Positive)).count();
    let filtered = before - kept.len();
    let filtered_positive = positives_before - positives_after;

    let mut instances = Vec::with_capacity(kept.len());
    for c in kept {
        let sequence = build_sequence(
            doc,
            &c.candidate,
            &groups,
            &signature,
            &resources.clusters,
            &resources.stopwords,
        )?;
        let features = extract_features(&c.candidate, doc, &sequence, &groups)?;
        instances.push(Instance {
            candidate: c.candidate,
            minimal_span: c.minimal_span,
            sequence,
            features,
        });
    }
    Ok((groups, instances, filtered, filtered_positive))
}

pub fn prepare_corpus(
    corpus: &Corpus,
    config: &PipelineConfig,
    resources: &Resources,
) -> Result<PreparedCorpus, PipelineError> {
    let mut out = PreparedCorpus::default();
    for doc in &corpus.documents {
        let (groups, instances, filtered, filtered_positive) = prepare_document(doc, &config.relation, resources)?;
        out.instances.extend(instances);
        out.filtered += filtered;
        out.filtered_positive += filtered_positive;
        out.gold.extend(
            doc.gold(&config.relation.name)
                .map(|g| CandidateRelationInstance::from_annotation(doc.doc_id(), g)),
        );
        out.alias_groups.insert(doc.doc_id().to_string(), groups);
    }
    if out.filtered_positive > 0 {
        log::info!(
            "{} positive candidates exceed the minimal-span threshold {} and are not classified",
            out.filtered_positive,
            config.relation.max_minimal_span
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "classifier", rename_all = "lowercase")]
pub enum Classifier {
    Svm(SvmModel),
    Maxent(MaxEntModel),
}

/// Model file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub relation: RelationConfig,
    pub model: Classifier,
}

impl ModelFile {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let file = File::open(path).map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let model: ModelFile =
            serde_json::from_reader(BufReader::new(file)).map_err(|source| PipelineError::Json {
                what: "model",
                path: path.to_path_buf(),
                source,
            })?;
        if model.version != MODEL_VERSION {
            return Err(PipelineError::Version(model.version));
        }
        Ok(model)
    }

    /// Fails when the model's relation arity differs from `relation`'s.
    pub fn check_compatible(&self, relation: &RelationConfig) -> Result<(), PipelineError> {
        if self.relation.arg_types.len() != relation.arg_types.len() {
            return Err(PipelineError::Incompatible {
                model: self.relation.name.clone(),
                model_arity: self.relation.arg_types.len(),
                config: relation.name.clone(),
                config_arity: relation.arg_types.len(),
            });
        }
        Ok(())
    }
}

pub fn train(prepared: &PreparedCorpus, config: &PipelineConfig) -> Result<ModelFile, PipelineError> {
    if prepared.instances.is_empty() {
        return Err(PipelineError::NoCandidates);
    }
    let labels = prepared.labels();
    let uniform = vec![1.0; labels.len()];
    let model = match config.classifier {
        ClassifierKind::Svm => {
            let weights = if config.svm.balance_classes {
                class_balance_weights(&labels)?
            } else {
                uniform
            };
            let (model, solution) = train_svm(
                &prepared.sequences(),
                &labels,
                &weights,
                config.svm.c,
                config.kernel,
                &config.svm.smo(),
            )?;
            log::info!(
                "SMO finished after {} iterations (converged: {}, KKT gap {:.2e}, {} support vectors)",
                solution.iterations,
                solution.converged,
                solution.kkt_gap,
                model.supports.len()
            );
            Classifier::Svm(model)
        }
        ClassifierKind::Maxent => {
            let weights = if config.maxent.balance_classes {
                class_balance_weights(&labels)?
            } else {
                uniform
            };
            let fvs: Vec<FeatureVector> = prepared.instances.iter().map(|i| i.features.clone()).collect();
            Classifier::Maxent(train_maxent(&fvs, &labels, &weights, &config.maxent.optimizer())?)
        }
    };
    Ok(ModelFile {
        version: MODEL_VERSION,
        relation: config.relation.clone(),
        model,
    })
}

/// A candidate with its predicted label and raw score (SVM decision value
/// or MaxEnt probability).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    #[serde(flatten)]
    pub candidate: CandidateRelationInstance,
    pub score: f64,
}

pub fn predict(model: &ModelFile, prepared: &PreparedCorpus) -> Result<Vec<Prediction>, PipelineError> {
    let scored: Vec<(f64, Label)> = match &model.model {
        Classifier::Svm(svm) => svm
            .predictor()?
            .score_all(&prepared.sequences())?
            .into_iter()
            .map(|s| (s, Label::from_bool(s > 0.0)))
            .collect(),
        Classifier::Maxent(m) => prepared
            .instances
            .iter()
            .map(|i| predict_maxent(m, &i.features))
            .collect(),
    };
    Ok(prepared
        .instances
        .iter()
        .zip(scored)
        .map(|(inst, (score, label))| {
            let mut candidate = inst.candidate.clone();
            candidate.label = Some(label);
            Prediction { candidate, score }
        })
        .collect())
}

/// Scores predictions aligned with `prepared.instances`.
pub fn evaluate(
    level: EvalLevel,
    predictions: &[Prediction],
    prepared: &PreparedCorpus,
) -> Result<EvalReport, PipelineError> {
    Ok(match level {
        EvalLevel::Rigd => {
            let positives: Vec<_> = predictions
                .iter()
                .filter(|p| p.candidate.label == Some(Label::Positive))
                .map(|p| p.candidate.clone())
                .collect();
            evaluate_rigd(&positives, &prepared.gold, &prepared.alias_groups)
        }
        EvalLevel::Mention => {
            let predicted: Vec<_> = predictions.iter().map(|p| p.candidate.clone()).collect();
            evaluate_mention(&predicted, &prepared.labels())?
        }
    })
}

/// Trains on `train` and evaluates on `test` at the given level.
pub fn train_and_evaluate(
    train_corpus: &Corpus,
    test_corpus: &Corpus,
    config: &PipelineConfig,
    resources: &Resources,
    level: EvalLevel,
) -> Result<(ModelFile, EvalReport), PipelineError> {
    let train_set = prepare_corpus(train_corpus, config, resources)?;
    let model = train(&train_set, config)?;
    let test_set = prepare_corpus(test_corpus, config, resources)?;
    let predictions = predict(&model, &test_set)?;
    let report = evaluate(level, &predictions, &test_set)?;
    Ok((model, report))
}
