//! Candidate relation instances: generation, span computation, filtering,
//! grouping of similar instances and labeling against gold annotations.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AliasGroups, CorpusDocument, Document, RelationAnnotation, RelationSignature};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CandidateError {
    #[error("arity mismatch: {0} vs {1} arguments")]
    ArityMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    /// +1 / -1.
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }
}

/// A document id plus an ordered tuple of argument entities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CandidateRelationInstance {
    pub doc_id: String,
    pub arg_entity_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

impl CandidateRelationInstance {
    pub fn new(doc_id: impl Into<String>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        CandidateRelationInstance {
            doc_id: doc_id.into(),
            arg_entity_ids: args.into_iter().map(Into::into).collect(),
            label: None,
        }
    }

    pub fn arity(&self) -> usize {
        self.arg_entity_ids.len()
    }

    pub fn from_annotation(doc_id: &str, ann: &RelationAnnotation) -> Self {
        CandidateRelationInstance::new(doc_id, ann.arg_entity_ids.iter().cloned())
    }
}

/// Sentence range covered by all argument mentions (and alias mentions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub first: usize,
    pub last: usize,
}

impl Span {
    pub fn sentences(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn width(&self) -> usize {
        self.last - self.first
    }
}

/// All ordered entity tuples of `doc` matching `signature`, except tuples
/// that repeat an entity or put two alias-related entities in different
/// slots. Ordered lexicographically by entity id, first slot outermost.
pub fn generate_candidates(
    doc: &CorpusDocument,
    alias_groups: &AliasGroups,
    signature: &RelationSignature,
) -> Vec<CandidateRelationInstance> {
    let per_slot: Vec<Vec<&str>> = signature
        .arg_types
        .iter()
        .map(|ty| {
            let mut ids: Vec<&str> = doc
                .entities
                .iter()
                .filter(|e| &e.entity_type == ty)
                .map(|e| e.entity_id.as_str())
                .collect();
            ids.sort_unstable();
            ids
        })
        .collect();

    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::with_capacity(per_slot.len());
    extend_tuples(&per_slot, alias_groups, &mut current, &mut |tuple| {
        out.push(CandidateRelationInstance::new(doc.doc_id(), tuple.iter().copied()));
    });
    out
}

fn extend_tuples<'a>(
    per_slot: &[Vec<&'a str>],
    groups: &AliasGroups,
    current: &mut Vec<&'a str>,
    emit: &mut dyn FnMut(&[&'a str]),
) {
    if current.len() == per_slot.len() {
        emit(current);
        return;
    }
    for &id in &per_slot[current.len()] {
        if current.iter().any(|&prev| groups.same_group(prev, id)) {
            continue;
        }
        current.push(id);
        extend_tuples(per_slot, groups, current, emit);
        current.pop();
    }
}

/// For each argument slot, the sentence indices of every mention of the
/// argument or one of its aliases.
pub fn argument_sentences(
    candidate: &CandidateRelationInstance,
    doc: &Document,
    alias_groups: &AliasGroups,
) -> Vec<BTreeSet<usize>> {
    candidate
        .arg_entity_ids
        .iter()
        .map(|id| {
            let members = alias_group_members(id, alias_groups);
            doc.mentions
                .iter()
                .filter(|m| members.contains(&m.entity_id.as_str()))
                .map(|m| m.sentence_index)
                .collect()
        })
        .collect()
}

pub(crate) fn alias_group_members<'a>(entity_id: &'a str, groups: &'a AliasGroups) -> Vec<&'a str> {
    match groups.members(entity_id) {
        Some(members) => members.iter().map(String::as_str).collect(),
        None => vec![entity_id],
    }
}

/// `None` when some argument has no mention in `doc`.
pub fn span(
    candidate: &CandidateRelationInstance,
    doc: &Document,
    alias_groups: &AliasGroups,
) -> Option<Span> {
    let slots = argument_sentences(candidate, doc, alias_groups);
    if slots.iter().any(BTreeSet::is_empty) {
        return None;
    }
    let first = slots.iter().filter_map(|s| s.first()).min().copied()?;
    let last = slots.iter().filter_map(|s| s.last()).max().copied()?;
    Some(Span { first, last })
}

/// Minimum sentence separation between the mentions of two slots.
pub(crate) fn min_separation(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> Option<usize> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x.abs_diff(y)))
        .min()
}

/// Maximum over argument pairs of the minimum sentence separation between
/// their mentions. `None` when some argument has no mention in `doc`.
pub fn minimal_span(
    candidate: &CandidateRelationInstance,
    doc: &Document,
    alias_groups: &AliasGroups,
) -> Option<usize> {
    let slots = argument_sentences(candidate, doc, alias_groups);
    let mut worst = 0;
    for i in 0..slots.len() {
        for j in i + 1..slots.len() {
            worst = worst.max(min_separation(&slots[i], &slots[j])?);
        }
    }
    if slots.iter().any(BTreeSet::is_empty) {
        return None;
    }
    Some(worst)
}

/// A candidate with its span and minimal span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpannedCandidate {
    #[serde(flatten)]
    pub candidate: CandidateRelationInstance,
    pub span: Span,
    pub minimal_span: usize,
}

pub fn with_spans(
    candidates: Vec<CandidateRelationInstance>,
    doc: &Document,
    alias_groups: &AliasGroups,
) -> Vec<SpannedCandidate> {
    candidates
        .into_iter()
        .filter_map(|candidate| {
            let span = span(&candidate, doc, alias_groups)?;
            let minimal_span = minimal_span(&candidate, doc, alias_groups)?;
            Some(SpannedCandidate {
                candidate,
                span,
                minimal_span,
            })
        })
        .collect()
}

/// Keeps candidates with `minimal_span <= threshold`.
pub fn filter_candidates(candidates: Vec<SpannedCandidate>, threshold: usize) -> Vec<SpannedCandidate> {
    candidates
        .into_iter()
        .filter(|c| c.minimal_span <= threshold)
        .collect()
}

/// Slot-wise identity-or-alias test. Slots are never permuted.
pub fn similar(
    a: &CandidateRelationInstance,
    b: &CandidateRelationInstance,
    alias_groups: &AliasGroups,
) -> Result<bool, CandidateError> {
    if a.arity() != b.arity() {
        return Err(CandidateError::ArityMismatch(a.arity(), b.arity()));
    }
    Ok(a.doc_id == b.doc_id
        && a
            .arg_entity_ids
            .iter()
            .zip(&b.arg_entity_ids)
            .all(|(x, y)| alias_groups.same_group(x, y)))
}

/// Canonical key shared by exactly the candidates similar to this one: the
/// smallest alias-group member per slot.
pub fn group_key(candidate: &CandidateRelationInstance, alias_groups: &AliasGroups) -> Vec<String> {
    candidate
        .arg_entity_ids
        .iter()
        .map(|id| {
            alias_groups
                .members(id)
                .and_then(|m| m.first())
                .unwrap_or(id)
                .clone()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateGroup {
    pub doc_id: String,
    pub members: Vec<CandidateRelationInstance>,
}

/// Partitions candidates into groups of mutually similar instances. Groups
/// come out ordered by (document, key); members keep their input order.
pub fn group_candidates(
    candidates: &[CandidateRelationInstance],
    alias_groups: &AliasGroups,
) -> Vec<CandidateGroup> {
    let mut groups: BTreeMap<(String, Vec<String>), Vec<CandidateRelationInstance>> = BTreeMap::new();
    for c in candidates {
        groups
            .entry((c.doc_id.clone(), group_key(c, alias_groups)))
            .or_default()
            .push(c.clone());
    }
    groups
        .into_iter()
        .map(|((doc_id, _), members)| CandidateGroup { doc_id, members })
        .collect()
}

/// Positive iff similar to some gold tuple of the same document.
pub fn label_candidates(
    candidates: Vec<CandidateRelationInstance>,
    gold: &[RelationAnnotation],
    alias_groups: &AliasGroups,
) -> Vec<CandidateRelationInstance> {
    let gold_keys: BTreeSet<Vec<String>> = gold
        .iter()
        .map(|g| {
            let c = CandidateRelationInstance::new("", g.arg_entity_ids.iter().cloned());
            group_key(&c, alias_groups)
        })
        .collect();
    candidates
        .into_iter()
        .map(|mut c| {
            c.label = Some(Label::from_bool(gold_keys.contains(&group_key(&c, alias_groups))));
            c
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{alias_closure, parse_corpus, AliasRuleSet, Entity};
    use crate::fixtures;
    use proptest::prelude::*;

    fn news() -> (CorpusDocument, AliasGroups) {
        let corpus = fixtures::news_corpus();
        let doc = corpus.documents[0].clone();
        let groups = alias_closure(&doc.entities, AliasRuleSet::General);
        (doc, groups)
    }

    fn t1() -> CandidateRelationInstance {
        CandidateRelationInstance::new("news_1.txt", ["ab_volvo", "chairman", "gyllenhammar", "svanholm"])
    }

    /// Document with one entity per listed (id, type, sentences-of-mentions).
    fn synthetic_doc(entities: &[(&str, &str, &[usize])], sentences: usize) -> CorpusDocument {
        let mut lines = vec![format!(
            r#"{{"kind":"document","doc_id":"d","sentences":[{}]}}"#,
            vec![r#"["w0","w1","w2","w3","w4","w5","w6","w7"]"#; sentences].join(",")
        )];
        for (k, (id, ty, sents)) in entities.iter().enumerate() {
            let mentions: Vec<String> = sents
                .iter()
                .map(|s| {
                    format!(
                        r#"{{"sentence_index":{s},"token_start":{},"token_end":{}}}"#,
                        k % 8,
                        k % 8 + 1
                    )
                })
                .collect();
            lines.push(format!(
                r#"{{"kind":"entity","doc_id":"d","entity_id":"{id}","entity_type":"{ty}","mentions":[{}]}}"#,
                mentions.join(",")
            ));
        }
        parse_corpus(&lines.join("\n"), None).unwrap().documents.remove(0)
    }

    #[test]
    fn succession_candidates_two_person_orderings() {
        let doc = synthetic_doc(
            &[("o", "ORG", &[0]), ("p", "POST", &[0]), ("a", "PER", &[0]), ("b", "PER", &[1])],
            2,
        );
        let sig = fixtures::succession();
        let groups = AliasGroups::singletons(&doc.entities);
        let cands = generate_candidates(&doc, &groups, &sig);
        let tuples: Vec<Vec<String>> = cands.into_iter().map(|c| c.arg_entity_ids).collect();
        assert_eq!(
            tuples,
            vec![
                vec!["o".to_string(), "p".into(), "a".into(), "b".into()],
                vec!["o".to_string(), "p".into(), "b".into(), "a".into()],
            ]
        );
    }

    #[test]
    fn missing_type_gives_no_candidates() {
        let doc = synthetic_doc(&[("o", "ORG", &[0]), ("a", "PER", &[0]), ("b", "PER", &[0])], 1);
        let groups = AliasGroups::singletons(&doc.entities);
        assert!(generate_candidates(&doc, &groups, &fixtures::succession()).is_empty());
    }

    #[test]
    fn drug_gene_mutation_has_six_candidates() {
        let corpus = parse_corpus(fixtures::DRUG_GENE_MUTATION_JSONL, None).unwrap();
        let doc = &corpus.documents[0];
        let groups = alias_closure(&doc.entities, AliasRuleSet::BiomedicalPrefix);
        let cands = generate_candidates(doc, &groups, &fixtures::interact());
        assert_eq!(cands.len(), 6);
    }

    #[test]
    fn alias_related_entities_never_share_a_tuple() {
        let (doc, groups) = news();
        let cands = generate_candidates(&doc, &groups, &fixtures::succession());
        assert!(!cands.is_empty());
        for c in &cands {
            assert!(!(c.arg_entity_ids[2] == "svanholm" && c.arg_entity_ids[3] == "mr_svanholm"));
            assert!(!(c.arg_entity_ids[3] == "svanholm" && c.arg_entity_ids[2] == "mr_svanholm"));
        }
        // ORG(6) x POST(2) x ordered PER pairs excluding the Svanholm alias pair (6 - 2).
        assert_eq!(cands.len(), 6 * 2 * 4);
    }

    #[test]
    fn table_three_spans() {
        let (doc, groups) = news();
        let s = span(&t1(), &doc.document, &groups).unwrap();
        assert_eq!(s, Span { first: 0, last: 2 });
        assert_eq!(s.sentences(), 3);
        assert_eq!(minimal_span(&t1(), &doc.document, &groups), Some(2));
    }

    #[test]
    fn span_min_max_over_mentions() {
        let doc = synthetic_doc(&[("a", "X", &[1, 4]), ("b", "Y", &[2])], 5);
        let groups = AliasGroups::singletons(&doc.entities);
        let c = CandidateRelationInstance::new("d", ["a", "b"]);
        assert_eq!(span(&c, &doc.document, &groups), Some(Span { first: 1, last: 4 }));
        assert_eq!(minimal_span(&c, &doc.document, &groups), Some(1));
    }

    #[test]
    fn single_sentence_span() {
        let doc = synthetic_doc(&[("a", "X", &[0]), ("b", "Y", &[0])], 1);
        let groups = AliasGroups::singletons(&doc.entities);
        let c = CandidateRelationInstance::new("d", ["a", "b"]);
        assert_eq!(span(&c, &doc.document, &groups), Some(Span { first: 0, last: 0 }));
        assert_eq!(minimal_span(&c, &doc.document, &groups), Some(0));
    }

    #[test]
    fn ternary_minimal_span_is_worst_pair() {
        // Pairwise minima: (a,b)=0, (a,c)=1... constructed as {0, 1, 3}.
        let doc = synthetic_doc(
            &[("a", "X", &[0, 5]), ("b", "Y", &[0, 2]), ("c", "Z", &[6])],
            7,
        );
        let groups = AliasGroups::singletons(&doc.entities);
        let c = CandidateRelationInstance::new("d", ["a", "b", "c"]);
        // Brute force over mention pairs.
        let sents = argument_sentences(&c, &doc.document, &groups);
        let mut minima = vec![];
        for i in 0..3 {
            for j in i + 1..3 {
                let mut best = usize::MAX;
                for x in &sents[i] {
                    for y in &sents[j] {
                        best = best.min(x.abs_diff(*y));
                    }
                }
                minima.push(best);
            }
        }
        assert_eq!(minima, vec![0, 1, 4]);
        assert_eq!(minimal_span(&c, &doc.document, &groups), Some(4));

        let doc = synthetic_doc(&[("a", "X", &[0]), ("b", "Y", &[0, 1]), ("c", "Z", &[3])], 4);
        let groups = AliasGroups::singletons(&doc.entities);
        let sents = argument_sentences(&c, &doc.document, &groups);
        assert_eq!(min_separation(&sents[0], &sents[1]), Some(0));
        assert_eq!(min_separation(&sents[0], &sents[2]), Some(3));
        assert_eq!(min_separation(&sents[1], &sents[2]), Some(2));
        assert_eq!(minimal_span(&c, &doc.document, &groups), Some(3));
    }

    #[test]
    fn filtering_by_threshold() {
        let (doc, groups) = news();
        let spanned = with_spans(vec![t1()], &doc.document, &groups);
        assert_eq!(filter_candidates(spanned.clone(), 2).len(), 1);
        assert_eq!(filter_candidates(spanned, 1).len(), 0);
        assert!(filter_candidates(vec![], 3).is_empty());

        let cands = generate_candidates(&doc, &groups, &fixtures::succession());
        let kept = filter_candidates(with_spans(cands, &doc.document, &groups), 0);
        for c in &kept {
            let sents = argument_sentences(&c.candidate, &doc.document, &groups);
            for i in 0..sents.len() {
                for j in i + 1..sents.len() {
                    assert!(!sents[i].is_disjoint(&sents[j]));
                }
            }
        }
    }

    #[test]
    fn table_one_instances_are_one_group() {
        let (_, groups) = news();
        let instances = [
            ["ab_volvo", "chairman", "gyllenhammar", "svanholm"],
            ["volvo", "chairman", "gyllenhammar", "svanholm"],
            ["ab_volvo", "chairman", "gyllenhammar", "mr_svanholm"],
            ["volvo", "chairman", "gyllenhammar", "mr_svanholm"],
        ]
        .map(|args| CandidateRelationInstance::new("news_1.txt", args));
        for a in &instances {
            for b in &instances {
                assert!(similar(a, b, &groups).unwrap());
            }
        }
        let grouped = group_candidates(&instances, &groups);
        assert_eq!(grouped.len(), 1);
        assert_eq!(grouped[0].members.len(), 4);
    }

    #[test]
    fn similarity_is_positional() {
        let (_, groups) = news();
        let a = t1();
        let swapped = CandidateRelationInstance::new(
            "news_1.txt",
            ["ab_volvo", "chairman", "svanholm", "gyllenhammar"],
        );
        let other = CandidateRelationInstance::new(
            "news_1.txt",
            ["renault", "chairman", "gyllenhammar", "svanholm"],
        );
        assert!(similar(&a, &a, &groups).unwrap());
        assert!(!similar(&a, &swapped, &groups).unwrap());
        assert!(!similar(&a, &other, &groups).unwrap());
        let short = CandidateRelationInstance::new("news_1.txt", ["ab_volvo", "chairman"]);
        assert_eq!(similar(&a, &short, &groups), Err(CandidateError::ArityMismatch(4, 2)));
    }

    #[test]
    fn labels_against_gold() {
        let corpus = parse_corpus(fixtures::DRUG_GENE_MUTATION_JSONL, None).unwrap();
        let doc = &corpus.documents[0];
        let groups = alias_closure(&doc.entities, AliasRuleSet::BiomedicalPrefix);
        let gold: Vec<RelationAnnotation> = doc.gold("Interact").cloned().collect();
        let cands = vec![
            CandidateRelationInstance::new("D1", ["erlotinib", "egfr", "l858r"]),
            CandidateRelationInstance::new("D1", ["gefitinib", "egfr", "t790m"]),
        ];
        let labeled = label_candidates(cands.clone(), &gold, &groups);
        assert_eq!(labeled[0].label, Some(Label::Positive));
        assert_eq!(labeled[1].label, Some(Label::Negative));
        let unlabeled = label_candidates(cands, &[], &groups);
        assert!(unlabeled.iter().all(|c| c.label == Some(Label::Negative)));
    }

    #[test]
    fn labels_survive_alias_substitution() {
        let (doc, groups) = news();
        let gold: Vec<RelationAnnotation> = doc.gold("Succession").cloned().collect();
        let variant = CandidateRelationInstance::new(
            "news_1.txt",
            ["volvo", "chairman", "gyllenhammar", "mr_svanholm"],
        );
        let labeled = label_candidates(vec![t1(), variant], &gold, &groups);
        assert!(labeled.iter().all(|c| c.label == Some(Label::Positive)));
    }

    // ---- property tests on random small documents ----

    fn random_entities() -> impl Strategy<Value = Vec<(usize, usize, Vec<usize>)>> {
        // (type index, surface index, mention sentences)
        prop::collection::vec(
            (0..3usize, 0..4usize, prop::collection::vec(0..4usize, 1..3)),
            1..8,
        )
    }

    fn build(spec: &[(usize, usize, Vec<usize>)]) -> (CorpusDocument, AliasGroups) {
        let types = ["A", "B", "C"];
        let owned: Vec<(String, &str, Vec<usize>)> = spec
            .iter()
            .enumerate()
            .map(|(i, (t, _, s))| (format!("e{i}"), types[*t], s.clone()))
            .collect();
        let refs: Vec<(&str, &str, &[usize])> = owned
            .iter()
            .map(|(id, t, s)| (id.as_str(), *t, s.as_slice()))
            .collect();
        let mut doc = synthetic_doc(&refs, 4);
        // Surface-based aliasing: entities sharing a surface index alias each other.
        let surfaces = ["alpha", "alpha beta", "gamma", "delta"];
        for (e, (_, s, _)) in doc.entities.iter_mut().zip(spec) {
            e.canonical_surface = surfaces[*s].to_string();
        }
        let groups = alias_closure(&doc.entities, AliasRuleSet::General);
        (doc, groups)
    }

    proptest! {
        #[test]
        fn candidate_count_matches_enumeration(spec in random_entities()) {
            let (doc, groups) = build(&spec);
            let sig = RelationSignature::new("R", ["A", "B", "A"]).unwrap();
            let cands = generate_candidates(&doc, &groups, &sig);
            let of_type = |t: &str| -> Vec<&Entity> {
                doc.entities.iter().filter(|e| e.entity_type == t).collect()
            };
            let mut expected = 0;
            let total = of_type("A").len() * of_type("B").len() * of_type("A").len();
            for x in of_type("A") {
                for y in of_type("B") {
                    for z in of_type("A") {
                        let ids = [&x.entity_id, &y.entity_id, &z.entity_id];
                        let clash = (0..3).any(|i| (i + 1..3).any(|j| groups.same_group(ids[i], ids[j])));
                        if !clash {
                            expected += 1;
                        }
                    }
                }
            }
            prop_assert!(expected <= total);
            prop_assert_eq!(cands.len(), expected);
        }

        #[test]
        fn minimal_span_within_span(spec in random_entities()) {
            let (doc, groups) = build(&spec);
            let sig = RelationSignature::new("R", ["A", "B"]).unwrap();
            for c in generate_candidates(&doc, &groups, &sig) {
                let s = span(&c, &doc.document, &groups).unwrap();
                let m = minimal_span(&c, &doc.document, &groups).unwrap();
                prop_assert!(m <= s.width());
            }
        }

        #[test]
        fn groups_are_similarity_classes(spec in random_entities()) {
            let (doc, groups) = build(&spec);
            let sig = RelationSignature::new("R", ["A", "C"]).unwrap();
            let cands = generate_candidates(&doc, &groups, &sig);
            // O(n^2) closure of `similar`.
            let n = cands.len();
            let mut class: Vec<usize> = (0..n).collect();
            loop {
                let mut changed = false;
                for i in 0..n {
                    for j in 0..n {
                        if similar(&cands[i], &cands[j], &groups).unwrap() && class[i] != class[j] {
                            let m = class[i].min(class[j]);
                            class[i] = m;
                            class[j] = m;
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            let mut expected: BTreeMap<usize, BTreeSet<CandidateRelationInstance>> = BTreeMap::new();
            for (i, c) in cands.iter().enumerate() {
                expected.entry(class[i]).or_default().insert(c.clone());
            }
            let mut expected: Vec<BTreeSet<_>> = expected.into_values().collect();
            let mut actual: Vec<BTreeSet<_>> = group_candidates(&cands, &groups)
                .into_iter()
                .map(|g| g.members.into_iter().collect())
                .collect();
            expected.sort();
            actual.sort();
            prop_assert_eq!(actual, expected);
        }

        #[test]
        fn labels_invariant_under_alias_swap(spec in random_entities()) {
            let (doc, groups) = build(&spec);
            let sig = RelationSignature::new("R", ["A", "B"]).unwrap();
            let cands = generate_candidates(&doc, &groups, &sig);
            if let Some(first) = cands.first() {
                let gold = vec![RelationAnnotation {
                    relation_name: "R".into(),
                    arg_entity_ids: first.arg_entity_ids.clone(),
                }];
                let labeled = label_candidates(cands.clone(), &gold, &groups);
                for c in &labeled {
                    if similar(c, first, &groups).unwrap() {
                        prop_assert_eq!(c.label, Some(Label::Positive));
                    }
                }
            }
        }
    }
}
