//! Generalized sequence representation of a candidate relation instance.
//!
//! The sentences of the candidate's span are scanned in order. Argument
//! mentions (and mentions of their aliases) become `E{i}`, other mentions of a
//! signature type become `OE_{type}`, sentence boundaries become `SB`, and the
//! remaining non-stopword words become word tokens, optionally carrying a
//! cluster id.

mod stopwords;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::candidates::{self, CandidateRelationInstance, Label};
use crate::clusters::ClusterMap;
use crate::corpus::{AliasGroups, CorpusDocument, EntityMention, RelationSignature};

pub use stopwords::{Stopwords, DEFAULT_STOPWORDS};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeqError {
    #[error("candidate ({0}) has an argument without mentions in its document")]
    MissingMention(String),
    #[error("candidate arity {candidate} does not match signature arity {signature}")]
    Arity { candidate: usize, signature: usize },
    #[error("invalid token '{0}'")]
    BadToken(String),
    #[error("invalid sequence: {0}")]
    Invalid(String),
}

/// One position of a sequence: a small set of symbols from one namespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneralizedToken {
    /// 1-based argument index.
    Arg(usize),
    SentenceBreak,
    OtherEntity(String),
    Word { word: String, cluster: Option<String> },
}

impl GeneralizedToken {
    pub fn word(w: impl Into<String>) -> Self {
        GeneralizedToken::Word {
            word: w.into(),
            cluster: None,
        }
    }

    pub fn clustered(w: impl Into<String>, c: impl Into<String>) -> Self {
        GeneralizedToken::Word {
            word: w.into(),
            cluster: Some(c.into()),
        }
    }

    pub fn other(ty: impl Into<String>) -> Self {
        GeneralizedToken::OtherEntity(ty.into())
    }

    /// Number of symbols in the token.
    pub fn symbol_count(&self) -> usize {
        match self {
            GeneralizedToken::Word { cluster: Some(_), .. } => 2,
            _ => 1,
        }
    }

    pub fn arg_index(&self) -> Option<usize> {
        match self {
            GeneralizedToken::Arg(i) => Some(*i),
            _ => None,
        }
    }
}

/// `|symbols(x) ∩ symbols(y)|`.
pub fn common_count(x: &GeneralizedToken, y: &GeneralizedToken) -> u32 {
    use GeneralizedToken::*;
    match (x, y) {
        (Arg(a), Arg(b)) => u32::from(a == b),
        (SentenceBreak, SentenceBreak) => 1,
        (OtherEntity(a), OtherEntity(b)) => u32::from(a == b),
        (
            Word {
                word: w1,
                cluster: c1,
            },
            Word {
                word: w2,
                cluster: c2,
            },
        ) => u32::from(w1 == w2) + u32::from(c1.is_some() && c1 == c2),
        _ => 0,
    }
}

impl fmt::Display for GeneralizedToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneralizedToken::Arg(i) => write!(f, "E{i}"),
            GeneralizedToken::SentenceBreak => f.write_str("SB"),
            GeneralizedToken::OtherEntity(t) => write!(f, "OE_{t}"),
            GeneralizedToken::Word {
                word,
                cluster: None,
            } => f.write_str(word),
            GeneralizedToken::Word {
                word,
                cluster: Some(c),
            } => write!(f, "{{{c}, {word}}}"),
        }
    }
}

impl FromStr for GeneralizedToken {
    type Err = SeqError;

    /// Inverse of `Display`. Words that look like `E3`, `SB` or `OE_X` cannot
    /// be written this way; use the JSON form for those.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || SeqError::BadToken(s.to_string());
        if s.is_empty() {
            return Err(bad());
        }
        if s == "SB" {
            return Ok(GeneralizedToken::SentenceBreak);
        }
        if let Some(ty) = s.strip_prefix("OE_") {
            if ty.is_empty() {
                return Err(bad());
            }
            return Ok(GeneralizedToken::other(ty));
        }
        if let Some(i) = s.strip_prefix('E').and_then(|d| d.parse::<usize>().ok()) {
            return if i >= 1 {
                Ok(GeneralizedToken::Arg(i))
            } else {
                Err(bad())
            };
        }
        if let Some(inner) = s.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
            let (c, w) = inner.split_once(',').ok_or_else(bad)?;
            let (c, w) = (c.trim(), w.trim());
            if c.is_empty() || w.is_empty() {
                return Err(bad());
            }
            return Ok(GeneralizedToken::clustered(w, c));
        }
        if s.contains(';') {
            return Err(bad());
        }
        Ok(GeneralizedToken::word(s))
    }
}

// JSON form: ["W","w"], ["W","w","C","c12"], ["E",1], ["SB"], ["OE","ORG"].
impl Serialize for GeneralizedToken {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            GeneralizedToken::Arg(i) => {
                let mut seq = serializer.serialize_seq(Some(2))?;
                seq.serialize_element("E")?;
                seq.serialize_element(i)?;
                seq.end()
            }
            GeneralizedToken::SentenceBreak => {
                let mut seq = serializer.serialize_seq(Some(1))?;
                seq.serialize_element("SB")?;
                seq.end()
            }
            GeneralizedToken::OtherEntity(t) => {
                let mut seq = serializer.serialize_seq(Some(2))?;
                seq.serialize_element("OE")?;
                seq.serialize_element(t)?;
                seq.end()
            }
            GeneralizedToken::Word { word, cluster } => {
                let len = if cluster.is_some() { 4 } else { 2 };
                let mut seq = serializer.serialize_seq(Some(len))?;
                seq.serialize_element("W")?;
                seq.serialize_element(word)?;
                if let Some(c) = cluster {
                    seq.serialize_element("C")?;
                    seq.serialize_element(c)?;
                }
                seq.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for GeneralizedToken {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct TokenVisitor;

        impl<'de> Visitor<'de> for TokenVisitor {
            type Value = GeneralizedToken;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str(r#"a tagged token array such as ["E",1] or ["W","word"]"#)
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
                let tag: String = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let token = match tag.as_str() {
                    "SB" => GeneralizedToken::SentenceBreak,
                    "E" => {
                        let i: usize = seq
                            .next_element()?
                            .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                        if i == 0 {
                            return Err(de::Error::custom("argument indices start at 1"));
                        }
                        GeneralizedToken::Arg(i)
                    }
                    "OE" => GeneralizedToken::OtherEntity(
                        seq.next_element()?
                            .ok_or_else(|| de::Error::invalid_length(1, &self))?,
                    ),
                    "W" => {
                        let word: String = seq
                            .next_element()?
                            .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                        let cluster = match seq.next_element::<String>()? {
                            None => None,
                            Some(c) if c == "C" => Some(
                                seq.next_element::<String>()?
                                    .ok_or_else(|| de::Error::invalid_length(3, &self))?,
                            ),
                            Some(other) => {
                                return Err(de::Error::custom(format!(
                                    "expected \"C\" after word, found {other:?}"
                                )))
                            }
                        };
                        GeneralizedToken::Word { word, cluster }
                    }
                    other => return Err(de::Error::custom(format!("unknown token tag {other:?}"))),
                };
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::custom("trailing elements in token"));
                }
                Ok(token)
            }
        }

        deserializer.deserialize_seq(TokenVisitor)
    }
}

/// Ordered tokens for one candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceRepresentation {
    pub doc_id: String,
    pub arg_entity_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    pub arity: usize,
    pub tokens: Vec<GeneralizedToken>,
}

impl SequenceRepresentation {
    /// Unattached sequence, mainly for kernel experiments.
    pub fn from_tokens(arity: usize, tokens: Vec<GeneralizedToken>) -> Self {
        SequenceRepresentation {
            doc_id: String::new(),
            arg_entity_ids: Vec::new(),
            label: None,
            arity,
            tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn candidate(&self) -> CandidateRelationInstance {
        CandidateRelationInstance {
            doc_id: self.doc_id.clone(),
            arg_entity_ids: self.arg_entity_ids.clone(),
            label: self.label,
        }
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<(), SeqError> {
        let sb = |t: &GeneralizedToken| *t == GeneralizedToken::SentenceBreak;
        if self.tokens.first().is_some_and(sb) || self.tokens.last().is_some_and(sb) {
            return Err(SeqError::Invalid("leading or trailing SB".into()));
        }
        if self.tokens.windows(2).any(|w| sb(&w[0]) && sb(&w[1])) {
            return Err(SeqError::Invalid("adjacent SB tokens".into()));
        }
        for t in &self.tokens {
            if let GeneralizedToken::Arg(i) = t {
                if *i == 0 || *i > self.arity {
                    return Err(SeqError::Invalid(format!("E{i} outside arity {}", self.arity)));
                }
            }
        }
        for i in 1..=self.arity {
            if !self.tokens.contains(&GeneralizedToken::Arg(i)) {
                return Err(SeqError::Invalid(format!("E{i} missing")));
            }
        }
        Ok(())
    }

    /// Parses the `a; b; {c1, w}; E1; SB; OE_ORG` form.
    pub fn parse(arity: usize, text: &str) -> Result<Self, SeqError> {
        let tokens = text
            .split(';')
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SequenceRepresentation::from_tokens(arity, tokens))
    }
}

impl fmt::Display for SequenceRepresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, t) in self.tokens.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// True for tokens with no letter or digit.
pub fn is_punctuation(token: &str) -> bool {
    !token.chars().any(char::is_alphanumeric)
}

/// Normalized word token, or `None` when the word is dropped.
pub fn word_token(raw: &str, clusters: &ClusterMap, stopwords: &Stopwords) -> Option<GeneralizedToken> {
    if is_punctuation(raw) {
        return None;
    }
    let word = raw.to_lowercase();
    if stopwords.contains(&word) {
        return None;
    }
    let cluster = clusters.get(&word).cloned();
    Some(GeneralizedToken::Word { word, cluster })
}

/// Non-overlapping mentions chosen from `mentions`: longest first, then
/// leftmost.
fn select_mentions(mut mentions: Vec<&EntityMention>) -> Vec<&EntityMention> {
    mentions.sort_by_key(|m| (std::cmp::Reverse(m.token_span.len()), m.token_span.start));
    let mut chosen: Vec<&EntityMention> = Vec::new();
    for m in mentions {
        let overlaps = chosen
            .iter()
            .any(|c| m.token_span.start < c.token_span.end && c.token_span.start < m.token_span.end);
        if !overlaps {
            chosen.push(m);
        }
    }
    chosen.sort_by_key(|m| m.token_span.start);
    chosen
}

/// Builds the sequence representation of `candidate`.
pub fn build_sequence(
    doc: &CorpusDocument,
    candidate: &CandidateRelationInstance,
    alias_groups: &AliasGroups,
    signature: &RelationSignature,
    clusters: &ClusterMap,
    stopwords: &Stopwords,
) -> Result<SequenceRepresentation, SeqError> {
    if candidate.arity() != signature.arity() {
        return Err(SeqError::Arity {
            candidate: candidate.arity(),
            signature: signature.arity(),
        });
    }
    let document = &doc.document;
    let span = candidates::span(candidate, document, alias_groups)
        .ok_or_else(|| SeqError::MissingMention(candidate.arg_entity_ids.join(", ")))?;

    let mut arg_of: BTreeMap<&str, usize> = BTreeMap::new();
    for (slot, id) in candidate.arg_entity_ids.iter().enumerate() {
        for member in candidates::alias_group_members(id, alias_groups) {
            arg_of.entry(member).or_insert(slot + 1);
        }
    }

    let mut tokens = Vec::new();
    for sentence in span.first..=span.last {
        if !tokens.is_empty() && tokens.last() != Some(&GeneralizedToken::SentenceBreak) {
            tokens.push(GeneralizedToken::SentenceBreak);
        }
        let range = document.sentences[sentence].clone();
        let relevant: Vec<&EntityMention> = document
            .mentions
            .iter()
            .filter(|m| m.sentence_index == sentence)
            .filter(|m| arg_of.contains_key(m.entity_id.as_str()) || signature.contains_type(&m.entity_type))
            .collect();
        let mut covered = vec![false; range.len()];
        for m in &relevant {
            for p in m.token_span.clone() {
                covered[p - range.start] = true;
            }
        }
        let chosen = select_mentions(relevant);
        let mut next = chosen.iter().peekable();
        for pos in range.clone() {
            if let Some(m) = next.next_if(|m| m.token_span.start == pos) {
                tokens.push(match arg_of.get(m.entity_id.as_str()) {
                    Some(&i) => GeneralizedToken::Arg(i),
                    None => GeneralizedToken::OtherEntity(m.entity_type.clone()),
                });
            } else if !covered[pos - range.start] {
                tokens.extend(word_token(&document.tokens[pos].text, clusters, stopwords));
            }
        }
    }
    if tokens.last() == Some(&GeneralizedToken::SentenceBreak) {
        tokens.pop();
    }

    Ok(SequenceRepresentation {
        doc_id: candidate.doc_id.clone(),
        arg_entity_ids: candidate.arg_entity_ids.clone(),
        label: candidate.label,
        arity: candidate.arity(),
        tokens,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::corpus::{alias_closure, parse_corpus, AliasRuleSet};
    use crate::fixtures;
    use proptest::prelude::*;

    const T1_TABLE: &str = "extraordinary; shareholders; meeting; of; E1; in; gothenburg; sweden; elected; E4; E2; \
        of; swedish; automotive; group; in; line; with; earlier; proposal; SB; E4; OE_POST; of; \
        OE_ORG; engineering; concern; jointly; owned; by; OE_ORG; OE_ORG; of; switzerland; SB; \
        E4; succeeds; E3; resigned; in; december; after; collapse; of; plan; to; merge; E1; \
        vehicle; operations; with; of; french; partner; OE_ORG";

    const T2_TABLE: &str = "extraordinary; shareholders; meeting; of; OE_ORG; in; gothenburg; sweden; elected; E3; \
        OE_POST; of; swedish; automotive; group; in; line; with; earlier; proposal; SB; E3; E2; \
        of; E1; engineering; concern; jointly; owned; by; OE_ORG; OE_ORG; of; switzerland; SB; \
        E3; succeeds; E4; resigned; in; december; after; collapse; of; plan; to; merge; OE_ORG; \
        vehicle; operations; with; of; french; partner; OE_ORG";

    fn news_seq(candidate: &CandidateRelationInstance, clusters: &ClusterMap) -> SequenceRepresentation {
        let corpus = fixtures::news_corpus();
        let doc = &corpus.documents[0];
        let groups = alias_closure(&doc.entities, AliasRuleSet::General);
        build_sequence(doc, candidate, &groups, &fixtures::succession(), clusters, &Stopwords::default())
            .unwrap()
    }

    #[test]
    fn common_counts() {
        use GeneralizedToken as G;
        assert_eq!(common_count(&G::clustered("radiotherapy", "c12"), &G::clustered("chemotherapy", "c12")), 1);
        assert_eq!(common_count(&G::Arg(1), &G::Arg(1)), 1);
        assert_eq!(common_count(&G::Arg(1), &G::Arg(2)), 0);
        assert_eq!(common_count(&G::clustered("extraordinary", "c12"), &G::clustered("extraordinary", "c12")), 2);
        assert_eq!(common_count(&G::word("x"), &G::clustered("x", "c1")), 1);
        assert_eq!(common_count(&G::word("E1"), &G::Arg(1)), 0);
        assert_eq!(common_count(&G::word("c1"), &G::clustered("y", "c1")), 0);
        assert_eq!(common_count(&G::SentenceBreak, &G::SentenceBreak), 1);
        assert_eq!(common_count(&G::other("ORG"), &G::other("ORG")), 1);
        assert_eq!(common_count(&G::other("ORG"), &G::word("ORG")), 0);
    }

    #[test]
    fn t1_matches_printed_sequence() {
        let seq = news_seq(&fixtures::news_t1(), &ClusterMap::new());
        let expected = SequenceRepresentation::parse(4, T1_TABLE).unwrap();
        assert_eq!(seq.to_string(), expected.to_string());
        assert_eq!(seq.tokens, expected.tokens);
        seq.validate().unwrap();
    }

    #[test]
    fn t2_swaps_argument_roles() {
        let seq = news_seq(&fixtures::news_t2(), &ClusterMap::new());
        assert_eq!(seq.to_string(), SequenceRepresentation::parse(4, T2_TABLE).unwrap().to_string());
        // "Mr. Svanholm" opens the second sentence.
        let sb = seq.tokens.iter().position(|t| *t == GeneralizedToken::SentenceBreak).unwrap();
        assert_eq!(seq.tokens[sb + 1], GeneralizedToken::Arg(3));
        assert_eq!(seq.tokens[sb + 2], GeneralizedToken::Arg(2));
    }

    #[test]
    fn clusters_generalize_words() {
        let clusters: ClusterMap = [("extraordinary".to_string(), "c12".to_string())].into();
        let seq = news_seq(&fixtures::news_t1(), &clusters);
        assert_eq!(seq.tokens[0], GeneralizedToken::clustered("extraordinary", "c12"));
        assert_eq!(seq.tokens[0].to_string(), "{c12, extraordinary}");
    }

    #[test]
    fn single_sentence_without_others() {
        let text = r#"{"kind":"document","doc_id":"d","sentences":[["Aspirin","inhibits","the","COX1","gene","."]]}
{"kind":"entity","doc_id":"d","entity_id":"a","entity_type":"Drug","mentions":[{"sentence_index":0,"token_start":0,"token_end":1}]}
{"kind":"entity","doc_id":"d","entity_id":"g","entity_type":"Gene","mentions":[{"sentence_index":0,"token_start":3,"token_end":4}]}"#;
        let corpus = parse_corpus(text, None).unwrap();
        let doc = &corpus.documents[0];
        let sig = RelationSignature::new("R", ["Drug", "Gene"]).unwrap();
        let groups = AliasGroups::singletons(&doc.entities);
        let c = CandidateRelationInstance::new("d", ["a", "g"]);
        let seq = build_sequence(doc, &c, &groups, &sig, &ClusterMap::new(), &Stopwords::default()).unwrap();
        assert_eq!(seq.to_string(), "E1; inhibits; E2; gene");
    }

    #[test]
    fn out_of_signature_mentions_emit_words_and_overlaps_resolve() {
        let text = r#"{"kind":"document","doc_id":"d","sentences":[["Alpha","Beta","Gamma","met","Delta","in","Paris","."],["Report","."],["Epsilon","left","."]]}
{"kind":"entity","doc_id":"d","entity_id":"ab","entity_type":"PER","mentions":[{"sentence_index":0,"token_start":0,"token_end":2}]}
{"kind":"entity","doc_id":"d","entity_id":"bg","entity_type":"PER","mentions":[{"sentence_index":0,"token_start":1,"token_end":3}]}
{"kind":"entity","doc_id":"d","entity_id":"d","entity_type":"PER","mentions":[{"sentence_index":0,"token_start":4,"token_end":5}]}
{"kind":"entity","doc_id":"d","entity_id":"p","entity_type":"LOC","mentions":[{"sentence_index":0,"token_start":6,"token_end":7}]}
{"kind":"entity","doc_id":"d","entity_id":"e","entity_type":"PER","mentions":[{"sentence_index":2,"token_start":0,"token_end":1}]}"#;
        let corpus = parse_corpus(text, None).unwrap();
        let doc = &corpus.documents[0];
        let sig = RelationSignature::new("R", ["PER", "PER"]).unwrap();
        let groups = AliasGroups::singletons(&doc.entities);
        let c = CandidateRelationInstance::new("d", ["d", "e"]);
        let seq = build_sequence(doc, &c, &groups, &sig, &ClusterMap::new(), &Stopwords::default()).unwrap();
        // Equal-length overlap: the leftmost mention wins and "Gamma" stays
        // consumed. "Paris" is a LOC, outside the signature. The middle
        // sentence has only a stopword-free word, so both SBs remain.
        assert_eq!(seq.to_string(), "OE_PER; met; E1; in; paris; SB; report; SB; E2; left");

        let empty_middle = text.replace(r#"["Report","."]"#, r#"["The","."]"#);
        let corpus = parse_corpus(&empty_middle, None).unwrap();
        let seq = build_sequence(&corpus.documents[0], &c, &groups, &sig, &ClusterMap::new(), &Stopwords::default())
            .unwrap();
        assert_eq!(seq.to_string(), "OE_PER; met; E1; in; paris; SB; E2; left");
        seq.validate().unwrap();
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let corpus = fixtures::news_corpus();
        let doc = &corpus.documents[0];
        let groups = AliasGroups::singletons(&doc.entities);
        let c = CandidateRelationInstance::new("news_1.txt", ["ab_volvo", "chairman"]);
        let err = build_sequence(doc, &c, &groups, &fixtures::succession(), &ClusterMap::new(), &Stopwords::default());
        assert_eq!(err, Err(SeqError::Arity { candidate: 2, signature: 4 }));
    }

    #[test]
    fn json_token_forms() {
        use GeneralizedToken as G;
        let tokens = vec![
            G::clustered("extraordinary", "c12"),
            G::word("of"),
            G::Arg(1),
            G::SentenceBreak,
            G::other("ORG"),
        ];
        let json = serde_json::to_string(&tokens).unwrap();
        assert_eq!(json, r#"[["W","extraordinary","C","c12"],["W","of"],["E",1],["SB"],["OE","ORG"]]"#);
        let back: Vec<G> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, tokens);
        for bad in [r#"["E",0]"#, r#"["X"]"#, r#"["W","a","Z","c"]"#, r#"["SB",1]"#, "[]"] {
            assert!(serde_json::from_str::<G>(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn display_parse_round_trip() {
        let seq = news_seq(&fixtures::news_t1(), &[("group".to_string(), "c3".to_string())].into());
        let back = SequenceRepresentation::parse(4, &seq.to_string()).unwrap();
        assert_eq!(back.tokens, seq.tokens);
        assert!("E0".parse::<GeneralizedToken>().is_err());
        assert!("{c1,}".parse::<GeneralizedToken>().is_err());
    }

    #[test]
    fn validate_catches_broken_sequences() {
        use GeneralizedToken as G;
        let bad = [
            vec![G::SentenceBreak, G::Arg(1), G::Arg(2)],
            vec![G::Arg(1), G::SentenceBreak, G::SentenceBreak, G::Arg(2)],
            vec![G::Arg(1), G::word("x")],
            vec![G::Arg(1), G::Arg(3)],
        ];
        for tokens in bad {
            assert!(SequenceRepresentation::from_tokens(2, tokens).validate().is_err());
        }
    }

    // ---- random documents with alias variants ----

    /// Random document over types A and B. Each entity gets a surface that is
    /// a fresh last name, optionally with an honorific variant as a second
    /// entity so that alias groups form under the general rules.
    fn random_doc(
        words: Vec<Vec<usize>>,
        entities: Vec<(bool, bool, usize, usize)>,
    ) -> CorpusDocument {
        let vocab = ["the", "met", "of", "in", "said", "x1", "and", "report", ",", "."];
        let names = ["Kato", "Lind", "Mora", "Nash", "Oda", "Park"];
        let mut sentences: Vec<Vec<String>> = words
            .iter()
            .map(|s| s.iter().map(|&w| vocab[w % vocab.len()].to_string()).collect())
            .collect();
        for s in &mut sentences {
            s.push(".".into());
        }
        let mut records = Vec::new();
        for (k, (is_a, variant, sent, _)) in entities.iter().enumerate() {
            let name = names[k % names.len()];
            let ty = if *is_a { "A" } else { "B" };
            let sent = sent % sentences.len();
            let mut mentions = Vec::new();
            let push = |surface: Vec<&str>, sentences: &mut Vec<Vec<String>>| {
                let start = sentences[sent].len();
                sentences[sent].extend(surface.iter().map(|s| s.to_string()));
                sentences[sent].push("said".into());
                format!(r#"{{"sentence_index":{sent},"token_start":{start},"token_end":{}}}"#, start + surface.len())
            };
            mentions.push(push(vec!["Dr", name], &mut sentences));
            records.push(format!(
                r#"{{"kind":"entity","doc_id":"r","entity_id":"e{k}","entity_type":"{ty}","mentions":[{}]}}"#,
                mentions.join(",")
            ));
            if *variant {
                let m = push(vec!["Mr.", name], &mut sentences);
                records.push(format!(
                    r#"{{"kind":"entity","doc_id":"r","entity_id":"v{k}","entity_type":"{ty}","mentions":[{m}]}}"#
                ));
            }
        }
        let doc = serde_json::json!({"kind": "document", "doc_id": "r", "sentences": sentences});
        let text = std::iter::once(doc.to_string()).chain(records).collect::<Vec<_>>().join("\n");
        parse_corpus(&text, None).unwrap().documents.remove(0)
    }

    pub(crate) fn doc_strategy() -> impl Strategy<Value = CorpusDocument> {
        (
            prop::collection::vec(prop::collection::vec(0..10usize, 0..6), 1..4),
            prop::collection::vec((any::<bool>(), any::<bool>(), 0..4usize, 0..3usize), 2..6),
        )
            .prop_map(|(w, e)| random_doc(w, e))
    }

    /// Independent count: one token per chosen mention plus surviving words,
    /// plus the SBs between non-empty sentences.
    fn recount(seq: &SequenceRepresentation, doc: &CorpusDocument, groups: &AliasGroups) -> usize {
        let c = seq.candidate();
        let span = candidates::span(&c, &doc.document, groups).unwrap();
        let sw = Stopwords::default();
        let mut per_sentence = Vec::new();
        for s in span.first..=span.last {
            let range = doc.document.sentences[s].clone();
            let mut count = 0;
            let mut pos = range.start;
            // Mentions in these documents never overlap.
            while pos < range.end {
                if let Some(m) = doc.document.mentions.iter().find(|m| m.token_span.start == pos) {
                    count += 1;
                    pos = m.token_span.end;
                } else {
                    let w = &doc.document.tokens[pos].text;
                    if w.chars().any(char::is_alphanumeric) && !sw.contains(w) {
                        count += 1;
                    }
                    pos += 1;
                }
            }
            per_sentence.push(count);
        }
        let nonempty = per_sentence.iter().filter(|&&c| c > 0).count();
        per_sentence.iter().sum::<usize>() + nonempty.saturating_sub(1)
    }

    proptest! {
        #[test]
        fn similar_candidates_share_sequences(doc in doc_strategy()) {
            let groups = alias_closure(&doc.entities, AliasRuleSet::General);
            let sig = RelationSignature::new("R", ["A", "B"]).unwrap();
            let cands = candidates::generate_candidates(&doc, &groups, &sig);
            for group in candidates::group_candidates(&cands, &groups) {
                let seqs: Vec<String> = group
                    .members
                    .iter()
                    .map(|c| {
                        let s = build_sequence(&doc, c, &groups, &sig, &ClusterMap::new(), &Stopwords::default()).unwrap();
                        serde_json::to_string(&s.tokens).unwrap()
                    })
                    .collect();
                prop_assert!(seqs.windows(2).all(|w| w[0] == w[1]));
            }
        }

        #[test]
        fn token_count_matches_recount(doc in doc_strategy()) {
            let groups = alias_closure(&doc.entities, AliasRuleSet::General);
            let sig = RelationSignature::new("R", ["A", "B"]).unwrap();
            for c in candidates::generate_candidates(&doc, &groups, &sig) {
                let s = build_sequence(&doc, &c, &groups, &sig, &ClusterMap::new(), &Stopwords::default()).unwrap();
                s.validate().unwrap();
                prop_assert_eq!(s.len(), recount(&s, &doc, &groups));
            }
        }

        #[test]
        fn display_round_trips(words in prop::collection::vec("[a-z]{1,6}", 0..10), arg in 1..4usize) {
            let mut tokens: Vec<GeneralizedToken> = words.iter().map(|w| GeneralizedToken::clustered(w.clone(), "c1")).collect();
            tokens.push(GeneralizedToken::Arg(arg));
            let seq = SequenceRepresentation::from_tokens(arg, tokens);
            let back = SequenceRepresentation::parse(arg, &seq.to_string()).unwrap();
            prop_assert_eq!(back.tokens, seq.tokens);
        }
    }
}
