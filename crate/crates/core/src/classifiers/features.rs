//! Sparse features for the logistic-regression baseline.

use std::collections::{BTreeMap, BTreeSet};

use crate::candidates::{self, CandidateRelationInstance};
use crate::corpus::{AliasGroups, CorpusDocument};
use crate::seqrep::{GeneralizedToken, SeqError, SequenceRepresentation};

/// Feature name to value. Boolean features are present with value 1.
pub type FeatureVector = BTreeMap<String, f64>;

/// Features of one candidate given its sequence representation.
///
/// Per argument pair `i < j` (1-based):
/// - `SentDiff_i_j`: fewest sentence breaks between an `E_i` and an `E_j`
///   token in the sequence.
/// - `SameLine_i_j`: 1 when that count is 0, else 0.
/// - `E{i}E{j}OE_{T}` or `E{i}E{j}NoOE_{T}` for each type `T` of `E_i` or
///   `E_j`, depending on whether an `OE_T` token lies strictly between some
///   `E_i` and some `E_j` occurrence.
///
/// Plus `TupleSpan` and `W=word` / `C=cluster` indicators.
pub fn extract_features(
    candidate: &CandidateRelationInstance,
    doc: &CorpusDocument,
    seq: &SequenceRepresentation,
    alias_groups: &AliasGroups,
) -> Result<FeatureVector, SeqError> {
    let missing = || SeqError::MissingMention(candidate.arg_entity_ids.join(", "));
    let tuple_span = candidates::minimal_span(candidate, &doc.document, alias_groups).ok_or_else(missing)?;
    let types: Vec<&str> = candidate
        .arg_entity_ids
        .iter()
        .map(|id| doc.entity(id).map(|e| e.entity_type.as_str()).ok_or_else(missing))
        .collect::<Result<_, _>>()?;

    let mut fv = FeatureVector::new();
    fv.insert("TupleSpan".into(), tuple_span as f64);

    let arity = candidate.arity();
    let positions: Vec<Vec<usize>> = (1..=arity)
        .map(|a| {
            seq.tokens
                .iter()
                .enumerate()
                .filter(|(_, t)| t.arg_index() == Some(a))
                .map(|(p, _)| p)
                .collect()
        })
        .collect();
    // breaks[p] = number of sentence breaks before position p.
    let breaks: &Vec<usize> = &seq
        .tokens
        .iter()
        .scan(0, |n, t| {
            let before = *n;
            if *t == GeneralizedToken::SentenceBreak {
                *n += 1;
            }
            Some(before)
        })
        .collect();

    for i in 0..arity {
        for j in i + 1..arity {
            let (a, b) = (i + 1, j + 1);
            let diff = positions[i]
                .iter()
                .flat_map(|&p| positions[j].iter().map(move |&q| breaks[p].abs_diff(breaks[q])))
                .min()
                .ok_or_else(missing)?;
            fv.insert(format!("SentDiff_{a}_{b}"), diff as f64);
            fv.insert(format!("SameLine_{a}_{b}"), if diff == 0 { 1.0 } else { 0.0 });

            let pair_types: BTreeSet<&str> = [types[i], types[j]].into();
            for ty in pair_types {
                let between = positions[i].iter().any(|&p| {
                    positions[j].iter().any(|&q| {
                        let (lo, hi) = (p.min(q), p.max(q));
                        seq.tokens[lo + 1..hi]
                            .iter()
                            .any(|t| matches!(t, GeneralizedToken::OtherEntity(et) if et == ty))
                    })
                });
                let tag = if between { "OE" } else { "NoOE" };
                fv.insert(format!("E{a}E{b}{tag}_{ty}"), 1.0);
            }
        }
    }

    for token in &seq.tokens {
        if let GeneralizedToken::Word { word, cluster } = token {
            fv.insert(format!("W={word}"), 1.0);
            if let Some(c) = cluster {
                fv.insert(format!("C={c}"), 1.0);
            }
        }
    }
    Ok(fv)
}
