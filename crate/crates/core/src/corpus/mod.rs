//! Document model and the canonical JSONL corpus format.
//!
//! A corpus file holds one JSON object per line. Three record kinds exist:
//!
//! ```text
//! {"kind":"document","doc_id":"d1","sentences":[["An","extraordinary",...],[...]]}
//! {"kind":"entity","doc_id":"d1","entity_id":"e1","entity_type":"ORG",
//!  "mentions":[{"sentence_index":0,"token_start":5,"token_end":7}]}
//! {"kind":"relation","doc_id":"d1","relation_name":"Succession","arg_entity_ids":["e1","e2","e3","e4"]}
//! ```
//!
//! Mention offsets in the file are relative to their sentence; in memory they
//! are converted to document-level token indices.

pub mod alias;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use alias::{alias_closure, are_aliases, AliasGroups, AliasRuleSet};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("document '{doc_id}': invalid {field}: {message}")]
    Invariant {
        doc_id: String,
        field: String,
        message: String,
    },
    #[error("document '{doc_id}': relation references unknown entity '{entity_id}'")]
    UnknownEntity { doc_id: String, entity_id: String },
    #[error("invalid relation signature: {0}")]
    Signature(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    /// Character offset in the single-space-joined document text.
    pub char_start: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityMention {
    pub mention_id: String,
    pub entity_id: String,
    pub entity_type: String,
    pub sentence_index: usize,
    /// Document-level token range.
    pub token_span: Range<usize>,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    /// Document-level token range of each sentence.
    pub sentences: Vec<Range<usize>>,
    pub tokens: Vec<Token>,
    pub mentions: Vec<EntityMention>,
}

impl Document {
    pub fn sentence_tokens(&self, index: usize) -> &[Token] {
        &self.tokens[self.sentences[index].clone()]
    }

    pub fn mention(&self, mention_id: &str) -> Option<&EntityMention> {
        self.mentions.iter().find(|m| m.mention_id == mention_id)
    }

    pub fn mentions_of<'a>(&'a self, entity_id: &'a str) -> impl Iterator<Item = &'a EntityMention> {
        self.mentions.iter().filter(move |m| m.entity_id == entity_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub entity_id: String,
    pub entity_type: String,
    /// Surface of the first mention.
    pub canonical_surface: String,
    pub mention_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSignature {
    pub relation_name: String,
    pub arg_types: Vec<String>,
}

impl RelationSignature {
    pub fn new(
        relation_name: impl Into<String>,
        arg_types: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self, CorpusError> {
        let sig = RelationSignature {
            relation_name: relation_name.into(),
            arg_types: arg_types.into_iter().map(Into::into).collect(),
        };
        sig.validate()?;
        Ok(sig)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.arg_types.len() < 2 {
            return Err(CorpusError::Signature(format!(
                "'{}' needs at least 2 arguments, got {}",
                self.relation_name,
                self.arg_types.len()
            )));
        }
        if self.arg_types.iter().any(|t| t.is_empty()) {
            return Err(CorpusError::Signature(format!(
                "'{}' has an empty entity type",
                self.relation_name
            )));
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arg_types.len()
    }

    /// Distinct entity types in signature order.
    pub fn distinct_types(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.arg_types
            .iter()
            .filter(|t| seen.insert(t.as_str()))
            .map(String::as_str)
            .collect()
    }

    pub fn contains_type(&self, entity_type: &str) -> bool {
        self.arg_types.iter().any(|t| t == entity_type)
    }
}

impl fmt::Display for RelationSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.relation_name, self.arg_types.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationAnnotation {
    pub relation_name: String,
    pub arg_entity_ids: Vec<String>,
}

/// A document together with its entity list and gold relation annotations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusDocument {
    pub document: Document,
    pub entities: Vec<Entity>,
    pub relations: Vec<RelationAnnotation>,
}

impl CorpusDocument {
    pub fn doc_id(&self) -> &str {
        &self.document.doc_id
    }

    pub fn entity(&self, entity_id: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.entity_id == entity_id)
    }

    /// Gold annotations for one relation type.
    pub fn gold<'a>(&'a self, relation_name: &'a str) -> impl Iterator<Item = &'a RelationAnnotation> {
        self.relations
            .iter()
            .filter(move |r| r.relation_name == relation_name)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub documents: Vec<CorpusDocument>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn document(&self, doc_id: &str) -> Option<&CorpusDocument> {
        self.documents.iter().find(|d| d.doc_id() == doc_id)
    }

    /// Sub-corpus of the documents in `range` (clamped to the corpus size).
    pub fn slice(&self, range: Range<usize>) -> Corpus {
        let end = range.end.min(self.documents.len());
        let start = range.start.min(end);
        Corpus {
            documents: self.documents[start..end].to_vec(),
        }
    }
}

// ---------------------------------------------------------------------------
// Wire records

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Record {
    Document(DocumentRecord),
    Entity(EntityRecord),
    Relation(RelationRecord),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentRecord {
    doc_id: String,
    sentences: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntityRecord {
    doc_id: String,
    entity_id: String,
    entity_type: String,
    mentions: Vec<MentionRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MentionRecord {
    sentence_index: usize,
    token_start: usize,
    token_end: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationRecord {
    doc_id: String,
    relation_name: String,
    arg_entity_ids: Vec<String>,
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Issue {
    Invariant { field: String, message: String },
    UnknownEntity { entity_id: String },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::Invariant { field, message } => write!(f, "invalid {field}: {message}"),
            Issue::UnknownEntity { entity_id } => {
                write!(f, "relation references unknown entity '{entity_id}'")
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct DocumentReport {
    pub doc_id: String,
    pub sentences: usize,
    pub tokens: usize,
    pub entities: usize,
    pub relations: usize,
    pub issues: Vec<Issue>,
}

impl DocumentReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for DocumentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} sentences, {} tokens, {} entities, {} relations: ",
            self.doc_id, self.sentences, self.tokens, self.entities, self.relations
        )?;
        if self.issues.is_empty() {
            return f.write_str("ok");
        }
        write!(f, "{} issue(s)", self.issues.len())?;
        for issue in &self.issues {
            write!(f, "\n  - {issue}")?;
        }
        Ok(())
    }
}

/// Result of checking a corpus: the documents that assembled, and one report
/// per document id seen in the input.
#[derive(Debug, Clone, Default)]
pub struct Validation {
    pub corpus: Corpus,
    pub reports: Vec<DocumentReport>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.reports.iter().all(DocumentReport::is_ok)
    }

    pub fn into_corpus(self) -> Result<Corpus, CorpusError> {
        for report in &self.reports {
            if let Some(issue) = report.issues.first() {
                return Err(match issue.clone() {
                    Issue::Invariant { field, message } => CorpusError::Invariant {
                        doc_id: report.doc_id.clone(),
                        field,
                        message,
                    },
                    Issue::UnknownEntity { entity_id } => CorpusError::UnknownEntity {
                        doc_id: report.doc_id.clone(),
                        entity_id,
                    },
                });
            }
        }
        Ok(self.corpus)
    }
}

fn invariant(field: impl Into<String>, message: impl Into<String>) -> Issue {
    Issue::Invariant {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Default)]
struct PendingDoc {
    document: Option<DocumentRecord>,
    entities: Vec<EntityRecord>,
    relations: Vec<RelationRecord>,
    issues: Vec<Issue>,
}

fn parse_records(reader: impl BufRead) -> Result<Vec<Record>, CorpusError> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Parses and checks a corpus, collecting every invariant violation instead
/// of stopping at the first one. JSON syntax errors are still fatal.
pub fn validate_reader(
    reader: impl BufRead,
    signature: Option<&RelationSignature>,
) -> Result<Validation, CorpusError> {
    if let Some(sig) = signature {
        sig.validate()?;
    }
    let records = parse_records(reader)?;

    let mut order: Vec<String> = Vec::new();
    let mut pending: BTreeMap<String, PendingDoc> = BTreeMap::new();
    for record in records {
        let doc_id = match &record {
            Record::Document(d) => d.doc_id.clone(),
            Record::Entity(e) => e.doc_id.clone(),
            Record::Relation(r) => r.doc_id.clone(),
        };
        let slot = pending.entry(doc_id.clone()).or_insert_with(|| {
            order.push(doc_id.clone());
            PendingDoc::default()
        });
        match record {
            Record::Document(d) => {
                if slot.document.is_some() {
                    slot.issues
                        .push(invariant("doc_id", "duplicate document record"));
                } else {
                    slot.document = Some(d);
                }
            }
            Record::Entity(e) => slot.entities.push(e),
            Record::Relation(r) => slot.relations.push(r),
        }
    }

    let mut validation = Validation::default();
    for doc_id in order {
        let slot = pending.remove(&doc_id).expect("doc id recorded");
        let (doc, report) = assemble(doc_id, slot, signature);
        if let Some(doc) = doc {
            validation.corpus.documents.push(doc);
        }
        validation.reports.push(report);
    }
    Ok(validation)
}

fn assemble(
    doc_id: String,
    slot: PendingDoc,
    signature: Option<&RelationSignature>,
) -> (Option<CorpusDocument>, DocumentReport) {
    let mut report = DocumentReport {
        doc_id: doc_id.clone(),
        entities: slot.entities.len(),
        relations: slot.relations.len(),
        issues: slot.issues,
        ..Default::default()
    };
    let Some(doc_record) = slot.document else {
        report
            .issues
            .push(invariant("doc_id", "entity or relation records without a document record"));
        return (None, report);
    };

    // Sentences and tokens.
    let mut tokens = Vec::new();
    let mut sentences = Vec::with_capacity(doc_record.sentences.len());
    let mut char_pos = 0usize;
    for (si, sentence) in doc_record.sentences.iter().enumerate() {
        if sentence.is_empty() {
            report
                .issues
                .push(invariant("sentences", format!("sentence {si} is empty")));
        }
        let start = tokens.len();
        for (ti, text) in sentence.iter().enumerate() {
            if text.is_empty() || text.chars().any(char::is_whitespace) {
                report.issues.push(invariant(
                    "tokens",
                    format!("sentence {si} token {ti} is empty or contains whitespace: {text:?}"),
                ));
            }
            if !tokens.is_empty() {
                char_pos += 1;
            }
            tokens.push(Token {
                text: text.clone(),
                char_start: char_pos,
            });
            char_pos += text.chars().count();
        }
        sentences.push(start..tokens.len());
    }
    report.sentences = sentences.len();
    report.tokens = tokens.len();

    // Entities and their mentions.
    let mut mentions = Vec::new();
    let mut entities: Vec<Entity> = Vec::new();
    let mut seen_entities = BTreeSet::new();
    for rec in slot.entities {
        if !seen_entities.insert(rec.entity_id.clone()) {
            report.issues.push(invariant(
                "entity_id",
                format!("duplicate entity '{}'", rec.entity_id),
            ));
            continue;
        }
        if rec.entity_id.is_empty() {
            report.issues.push(invariant("entity_id", "empty entity id"));
            continue;
        }
        if rec.entity_type.is_empty() {
            report.issues.push(invariant(
                "entity_type",
                format!("entity '{}' has an empty type", rec.entity_id),
            ));
            continue;
        }
        if rec.mentions.is_empty() {
            report.issues.push(invariant(
                "mentions",
                format!("entity '{}' has no mentions", rec.entity_id),
            ));
            continue;
        }
        let mut mention_ids = Vec::with_capacity(rec.mentions.len());
        let mut ok = true;
        for (k, m) in rec.mentions.iter().enumerate() {
            let mention_id = format!("{}/m{}", rec.entity_id, k);
            let Some(range) = sentences.get(m.sentence_index) else {
                report.issues.push(invariant(
                    "mentions",
                    format!(
                        "mention '{mention_id}' refers to sentence {} but the document has {}",
                        m.sentence_index,
                        sentences.len()
                    ),
                ));
                ok = false;
                continue;
            };
            if m.token_end <= m.token_start {
                report.issues.push(invariant(
                    "mentions",
                    format!(
                        "mention '{mention_id}' has an empty token span [{}, {})",
                        m.token_start, m.token_end
                    ),
                ));
                ok = false;
                continue;
            }
            if m.token_end > range.len() {
                report.issues.push(invariant(
                    "mentions",
                    format!(
                        "mention '{mention_id}' span [{}, {}) crosses the end of sentence {} ({} tokens)",
                        m.token_start,
                        m.token_end,
                        m.sentence_index,
                        range.len()
                    ),
                ));
                ok = false;
                continue;
            }
            let span = range.start + m.token_start..range.start + m.token_end;
            let surface = tokens[span.clone()]
                .iter()
                .map(|t| t.text.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            mention_ids.push(mention_id.clone());
            mentions.push(EntityMention {
                mention_id,
                entity_id: rec.entity_id.clone(),
                entity_type: rec.entity_type.clone(),
                sentence_index: m.sentence_index,
                token_span: span,
                surface,
            });
        }
        if ok {
            let canonical_surface = mentions
                .iter()
                .find(|m| m.mention_id == mention_ids[0])
                .map(|m| m.surface.clone())
                .unwrap_or_default();
            entities.push(Entity {
                entity_id: rec.entity_id,
                entity_type: rec.entity_type,
                canonical_surface,
                mention_ids,
            });
        } else {
            mentions.retain(|m| m.entity_id != rec.entity_id);
        }
    }

    // Relations.
    let mut relations = Vec::with_capacity(slot.relations.len());
    for rec in slot.relations {
        let mut ok = true;
        for id in &rec.arg_entity_ids {
            if !seen_entities.contains(id) {
                report.issues.push(Issue::UnknownEntity {
                    entity_id: id.clone(),
                });
                ok = false;
            }
        }
        if !ok {
            continue;
        }
        if let Some(sig) = signature.filter(|s| s.relation_name == rec.relation_name) {
            if rec.arg_entity_ids.len() != sig.arity() {
                report.issues.push(invariant(
                    "arg_entity_ids",
                    format!(
                        "{} relation has {} arguments, signature {} expects {}",
                        rec.relation_name,
                        rec.arg_entity_ids.len(),
                        sig,
                        sig.arity()
                    ),
                ));
                continue;
            }
            for (slot_idx, (id, expected)) in
                rec.arg_entity_ids.iter().zip(&sig.arg_types).enumerate()
            {
                if let Some(entity) = entities.iter().find(|e| &e.entity_id == id) {
                    if &entity.entity_type != expected {
                        report.issues.push(invariant(
                            "arg_entity_ids",
                            format!(
                                "argument {} ('{}') has type {} but signature {} expects {}",
                                slot_idx + 1,
                                id,
                                entity.entity_type,
                                sig,
                                expected
                            ),
                        ));
                        ok = false;
                    }
                }
            }
            if !ok {
                continue;
            }
        }
        relations.push(RelationAnnotation {
            relation_name: rec.relation_name,
            arg_entity_ids: rec.arg_entity_ids,
        });
    }

    mentions.sort_by(|a, b| {
        (a.token_span.start, a.token_span.end, &a.mention_id)
            .cmp(&(b.token_span.start, b.token_span.end, &b.mention_id))
    });
    let doc = CorpusDocument {
        document: Document {
            doc_id,
            sentences,
            tokens,
            mentions,
        },
        entities,
        relations,
    };
    (Some(doc), report)
}

pub fn validate_corpus(
    path: impl AsRef<Path>,
    signature: Option<&RelationSignature>,
) -> Result<Validation, CorpusError> {
    let file = File::open(path)?;
    validate_reader(BufReader::new(file), signature)
}

/// Loads a corpus, failing on the first invariant violation.
pub fn load_corpus(
    path: impl AsRef<Path>,
    signature: &RelationSignature,
) -> Result<Corpus, CorpusError> {
    validate_corpus(path, Some(signature))?.into_corpus()
}

pub fn read_corpus(
    reader: impl BufRead,
    signature: Option<&RelationSignature>,
) -> Result<Corpus, CorpusError> {
    validate_reader(reader, signature)?.into_corpus()
}

pub fn parse_corpus(text: &str, signature: Option<&RelationSignature>) -> Result<Corpus, CorpusError> {
    read_corpus(text.as_bytes(), signature)
}

// ---------------------------------------------------------------------------
// Serialization

/// Writes the corpus in the canonical format: per document, the document
/// record, then entities, then relations.
pub fn write_corpus(corpus: &Corpus, mut out: impl Write) -> std::io::Result<()> {
    for cdoc in &corpus.documents {
        let doc = &cdoc.document;
        let sentences = doc
            .sentences
            .iter()
            .map(|r| doc.tokens[r.clone()].iter().map(|t| t.text.clone()).collect())
            .collect();
        write_record(
            &mut out,
            &Record::Document(DocumentRecord {
                doc_id: doc.doc_id.clone(),
                sentences,
            }),
        )?;
        for entity in &cdoc.entities {
            let mentions = entity
                .mention_ids
                .iter()
                .filter_map(|id| doc.mention(id))
                .map(|m| {
                    let base = doc.sentences[m.sentence_index].start;
                    MentionRecord {
                        sentence_index: m.sentence_index,
                        token_start: m.token_span.start - base,
                        token_end: m.token_span.end - base,
                    }
                })
                .collect();
            write_record(
                &mut out,
                &Record::Entity(EntityRecord {
                    doc_id: doc.doc_id.clone(),
                    entity_id: entity.entity_id.clone(),
                    entity_type: entity.entity_type.clone(),
                    mentions,
                }),
            )?;
        }
        for rel in &cdoc.relations {
            write_record(
                &mut out,
                &Record::Relation(RelationRecord {
                    doc_id: doc.doc_id.clone(),
                    relation_name: rel.relation_name.clone(),
                    arg_entity_ids: rel.arg_entity_ids.clone(),
                }),
            )?;
        }
    }
    Ok(())
}

fn write_record(out: &mut impl Write, record: &Record) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, record)?;
    out.write_all(b"\n")
}

pub fn corpus_to_string(corpus: &Corpus) -> String {
    let mut buf = Vec::new();
    write_corpus(corpus, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
