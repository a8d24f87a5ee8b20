//! Group-level (RIGD) and mention-level scoring.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::candidates::{group_candidates, similar, CandidateGroup, CandidateRelationInstance, Label};
use crate::corpus::AliasGroups;

/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("{predicted} predictions but {gold} gold labels")]
    LengthMismatch { predicted: usize, gold: usize },
    #[error("candidate {index} has no predicted label")]
    Unlabeled { index: usize },
    #[error("no fold reports to average")]
    NoFolds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalLevel {
    Rigd,
    Mention,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// Only counted at mention level.
    #[serde(default)]
    pub tn: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Counts {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        harmonic(self.precision(), self.recall())
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.tp + self.tn + self.fp + self.fn_)
    }

    fn add(&mut self, other: &Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub level: EvalLevel,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    pub per_document: BTreeMap<String, Counts>,
}

impl EvalReport {
    fn from_counts(level: EvalLevel, per_document: BTreeMap<String, Counts>) -> Self {
        let mut total = Counts::default();
        per_document.values().for_each(|c| total.add(c));
        EvalReport {
            schema_version: REPORT_SCHEMA_VERSION,
            level,
            tp: total.tp,
            fp: total.fp,
            fn_: total.fn_,
            precision: total.precision(),
            recall: total.recall(),
            f1: total.f1(),
            accuracy: (level == EvalLevel::Mention).then(|| total.accuracy()),
            per_document,
        }
    }

    pub fn counts(&self) -> Counts {
        let tn = self.per_document.values().map(|c| c.tn).sum();
        Counts {
            tp: self.tp,
            fp: self.fp,
            fn_: self.fn_,
            tn,
        }
    }
}

fn groups_by_doc(
    instances: &[CandidateRelationInstance],
    alias_groups: &BTreeMap<String, AliasGroups>,
) -> BTreeMap<String, Vec<CandidateGroup>> {
    let empty = AliasGroups::default();
    let mut by_doc: BTreeMap<&str, Vec<CandidateRelationInstance>> = BTreeMap::new();
    for c in instances {
        by_doc.entry(&c.doc_id).or_default().push(c.clone());
    }
    by_doc
        .into_iter()
        .map(|(doc, members)| {
            let groups = alias_groups.get(doc).unwrap_or(&empty);
            (doc.to_string(), group_candidates(&members, groups))
        })
        .collect()
}

/// Scores positive predictions against gold tuples one group at a time.
///
/// Predicted and gold instances are grouped by alias-aware similarity. Each
/// predicted group, in (document, key) order, claims the first unclaimed gold
/// group of its document that contains an instance similar to one of its
/// own; claimed pairs are true positives, unmatched predicted groups false
/// positives and unclaimed gold groups false negatives. Documents without an
/// entry in `alias_groups` fall back to entity identity.
pub fn evaluate_rigd(
    predicted: &[CandidateRelationInstance],
    gold: &[CandidateRelationInstance],
    alias_groups: &BTreeMap<String, AliasGroups>,
) -> EvalReport {
    let empty = AliasGroups::default();
    let pred_groups = groups_by_doc(predicted, alias_groups);
    let gold_groups = groups_by_doc(gold, alias_groups);
    let docs: BTreeSet<&String> = pred_groups.keys().chain(gold_groups.keys()).collect();

    let mut per_document = BTreeMap::new();
    for doc in docs {
        let groups = alias_groups.get(doc.as_str()).unwrap_or(&empty);
        let preds = pred_groups.get(doc).map(Vec::as_slice).unwrap_or_default();
        let golds = gold_groups.get(doc).map(Vec::as_slice).unwrap_or_default();
        let mut claimed = vec![false; golds.len()];
        let mut counts = Counts::default();
        for p in preds {
            let hit = (0..golds.len()).find(|&g| {
                !claimed[g]
                    && p.members.iter().any(|a| {
                        golds[g]
                            .members
                            .iter()
                            .any(|b| similar(a, b, groups).unwrap_or(false))
                    })
            });
            match hit {
                Some(g) => {
                    claimed[g] = true;
                    counts.tp += 1;
                }
                None => counts.fp += 1,
            }
        }
        counts.fn_ = claimed.iter().filter(|c| !**c).count();
        per_document.insert(doc.clone(), counts);
    }
    EvalReport::from_counts(EvalLevel::Rigd, per_document)
}

/// Per-candidate scores over the positive class plus accuracy. `predicted`
/// carries the predicted labels; `gold` is aligned with it.
pub fn evaluate_mention(
    predicted: &[CandidateRelationInstance],
    gold: &[Label],
) -> Result<EvalReport, EvalError> {
    if predicted.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            predicted: predicted.len(),
            gold: gold.len(),
        });
    }
    let mut per_document: BTreeMap<String, Counts> = BTreeMap::new();
    for (index, (c, g)) in predicted.iter().zip(gold).enumerate() {
        let p = c.label.ok_or(EvalError::Unlabeled { index })?;
        let counts = per_document.entry(c.doc_id.clone()).or_default();
        match (p.is_positive(), g.is_positive()) {
            (true, true) => counts.tp += 1,
            (true, false) => counts.fp += 1,
            (false, true) => counts.fn_ += 1,
            (false, false) => counts.tn += 1,
        }
    }
    Ok(EvalReport::from_counts(EvalLevel::Mention, per_document))
}

/// Metrics averaged over folds, each fold weighted equally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAverage {
    pub schema_version: u32,
    pub folds: Vec<EvalReport>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

pub fn average_folds(folds: Vec<EvalReport>) -> Result<FoldAverage, EvalError> {
    if folds.is_empty() {
        return Err(EvalError::NoFolds);
    }
    let k = folds.len() as f64;
    let mean = |f: fn(&EvalReport) -> f64| folds.iter().map(f).sum::<f64>() / k;
    let accuracy = folds
        .iter()
        .map(|r| r.accuracy)
        .collect::<Option<Vec<f64>>>()
        .map(|a| a.iter().sum::<f64>() / k);
    Ok(FoldAverage {
        schema_version: REPORT_SCHEMA_VERSION,
        precision: mean(|r| r.precision),
        recall: mean(|r| r.recall),
        f1: mean(|r| r.f1),
        accuracy,
        folds,
    })
}

fn pct(x: f64) -> String {
    format!("{:.1}", 100.0 * x)
}

/// Fixed-width summary with percentages to one decimal.
pub fn format_table(rows: &[(&str, &EvalReport)]) -> String {
    let mut out = format!(
        "{:<12} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}\n",
        "", "TP", "FP", "FN", "P", "R", "F", "Acc"
    );
    for (name, r) in rows {
        let acc = r.accuracy.map(pct).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<12} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}",
            name,
            r.tp,
            r.fp,
            r.fn_,
            pct(r.precision),
            pct(r.recall),
            pct(r.f1),
            acc
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Label::{Negative as N, Positive as P};

    fn inst(doc: &str, args: &[&str]) -> CandidateRelationInstance {
        CandidateRelationInstance::new(doc, args.iter().copied())
    }

    fn labeled(doc: &str, args: &[&str], label: Label) -> CandidateRelationInstance {
        let mut c = inst(doc, args);
        c.label = Some(label);
        c
    }

    /// Doc d: aliases {b1, b1v} and {h1}, {h2}.
    fn groups() -> BTreeMap<String, AliasGroups> {
        let g = AliasGroups::from_groups(vec![
            vec!["b1".into(), "b1v".into()],
            vec!["h1".into()],
            vec!["h2".into()],
        ]);
        [("d".to_string(), g)].into()
    }

    #[test]
    fn exact_predictions_score_one() {
        let gold = vec![inst("d", &["b1", "h1"]), inst("e", &["x", "y"])];
        let r = evaluate_rigd(&gold, &gold, &groups());
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
        assert_eq!(r.accuracy, None);
    }

    #[test]
    fn no_predictions() {
        let r = evaluate_rigd(&[], &[inst("d", &["b1", "h1"])], &groups());
        assert_eq!((r.tp, r.fp, r.fn_), (0, 0, 1));
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn hand_counted_rigd() {
        // Two predicted groups: one via an alias of the gold tuple, one spurious.
        let predicted = vec![
            inst("d", &["b1v", "h1"]),
            inst("d", &["b1", "h1"]),
            inst("d", &["b1", "h2"]),
        ];
        let gold = vec![inst("d", &["b1", "h1"])];
        let r = evaluate_rigd(&predicted, &gold, &groups());
        assert_eq!((r.tp, r.fp, r.fn_), (1, 1, 0));
        assert_eq!(r.precision, 0.5);
        assert_eq!(r.recall, 1.0);
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.per_document["d"], Counts { tp: 1, fp: 1, fn_: 0, tn: 0 });
    }

    #[test]
    fn aliased_gold_tuples_form_one_group() {
        let gold = vec![inst("d", &["b1", "h1"]), inst("d", &["b1v", "h1"])];
        let r = evaluate_rigd(&[inst("d", &["b1v", "h1"])], &gold, &groups());
        assert_eq!((r.tp, r.fp, r.fn_), (1, 0, 0));
        let r = evaluate_rigd(&[], &gold, &groups());
        assert_eq!(r.fn_, 1);
    }

    #[test]
    fn hand_counted_mention() {
        // 4 tp, 2 fp, 1 fn, 3 tn.
        let pred = [P, P, P, P, P, P, N, N, N, N];
        let gold = [P, P, P, P, N, N, P, N, N, N];
        let predicted: Vec<_> = pred.iter().map(|&l| labeled("d", &["a", "b"], l)).collect();
        let r = evaluate_mention(&predicted, &gold).unwrap();
        assert_eq!((r.tp, r.fp, r.fn_), (4, 2, 1));
        assert_eq!(r.precision, 4.0 / 6.0);
        assert_eq!(r.recall, 4.0 / 5.0);
        assert_eq!(r.accuracy, Some(0.7));
        assert_eq!(r.counts().tn, 3);
    }

    #[test]
    fn mention_extremes() {
        let gold = [P, N, P, N];
        let right: Vec<_> = gold.iter().map(|&l| labeled("d", &["a"], l)).collect();
        assert_eq!(evaluate_mention(&right, &gold).unwrap().accuracy, Some(1.0));
        let flipped: Vec<_> = gold
            .iter()
            .map(|&l| labeled("d", &["a"], Label::from_bool(!l.is_positive())))
            .collect();
        let r = evaluate_mention(&flipped, &gold).unwrap();
        assert_eq!((r.accuracy, r.f1), (Some(0.0), 0.0));
        assert_eq!(
            evaluate_mention(&right[..1], &gold),
            Err(EvalError::LengthMismatch { predicted: 1, gold: 4 })
        );
        assert_eq!(evaluate_mention(&[inst("d", &["a"])], &[P]), Err(EvalError::Unlabeled { index: 0 }));
    }

    #[test]
    fn fold_average_is_unweighted() {
        let a = evaluate_rigd(&[inst("d", &["b1", "h1"])], &[inst("d", &["b1", "h1"])], &groups());
        let b = evaluate_rigd(&[inst("d", &["b1", "h2"])], &[inst("d", &["b1", "h1"])], &groups());
        let avg = average_folds(vec![a, b]).unwrap();
        assert_eq!((avg.precision, avg.recall, avg.f1), (0.5, 0.5, 0.5));
        assert_eq!(average_folds(vec![]), Err(EvalError::NoFolds));
    }

    #[test]
    fn table_and_json() {
        let r = evaluate_rigd(&[inst("d", &["b1", "h1"]), inst("d", &["b1", "h2"])], &[inst("d", &["b1", "h1"])], &groups());
        let t = format_table(&[("rigd", &r)]);
        let row: Vec<&str> = t.lines().nth(1).unwrap().split_whitespace().collect();
        assert_eq!(row, ["rigd", "1", "1", "0", "50.0", "100.0", "66.7", "-"]);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["fn"], 0);
        assert_eq!(json["schema_version"], REPORT_SCHEMA_VERSION);
        let back: EvalReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, r);
    }

    fn scenario() -> impl Strategy<Value = (Vec<(usize, usize)>, Vec<(usize, usize)>, Vec<bool>)> {
        (
            prop::collection::vec((0..3usize, 0..3usize), 0..8),
            prop::collection::vec((0..3usize, 0..3usize), 0..5),
            prop::collection::vec(any::<bool>(), 8),
        )
    }

    /// Entities b0..b2 each have an alias b{k}v; habitats h0..h2.
    fn alias_world() -> BTreeMap<String, AliasGroups> {
        let mut gs: Vec<Vec<String>> = (0..3).map(|k| vec![format!("b{k}"), format!("b{k}v")]).collect();
        gs.extend((0..3).map(|k| vec![format!("h{k}")]));
        [("d".to_string(), AliasGroups::from_groups(gs))].into()
    }

    proptest! {
        #[test]
        fn rigd_invariants((preds, golds, swap) in scenario(), seed in any::<u64>()) {
            let world = alias_world();
            let mk = |(b, h): (usize, usize), alias: bool| {
                let b = if alias { format!("b{b}v") } else { format!("b{b}") };
                inst("d", &[b.as_str(), &format!("h{h}")])
            };
            let predicted: Vec<_> = preds.iter().map(|&p| mk(p, false)).collect();
            let gold: Vec<_> = golds.iter().map(|&g| mk(g, false)).collect();
            let r = evaluate_rigd(&predicted, &gold, &world);

            let pred_groups: BTreeSet<_> = preds.iter().collect();
            let gold_groups: BTreeSet<_> = golds.iter().collect();
            prop_assert_eq!(r.tp + r.fp, pred_groups.len());
            prop_assert_eq!(r.tp + r.fn_, gold_groups.len());

            let aliased: Vec<_> = preds.iter().zip(&swap).map(|(&p, &s)| mk(p, s)).collect();
            prop_assert_eq!(&evaluate_rigd(&aliased, &gold, &world), &r);

            let mut shuffled = predicted.clone();
            let k = (seed as usize) % shuffled.len().max(1);
            shuffled.rotate_left(k);
            shuffled.reverse();
            prop_assert_eq!(&evaluate_rigd(&shuffled, &gold, &world), &r);
        }
    }
}
