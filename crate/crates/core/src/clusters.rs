//! Word clusters from pre-trained embeddings: complete-linkage agglomerative
//! clustering under cosine distance, cut at a distance threshold.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use kodama::{linkage, Method};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::seqrep::{is_punctuation, Stopwords};

/// Word to cluster id.
pub type ClusterMap = BTreeMap<String, String>;

pub const DEFAULT_MIN_FREQ: usize = 5;
pub const DEFAULT_DISTANCE_THRESHOLD: f64 = 0.4;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("failed to read embeddings: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected {expected} values, found {found}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: '{field}' is not a number")]
    NonNumeric { line: usize, field: String },
    #[error("line {line}: non-finite value")]
    NonFinite { line: usize },
    #[error("line {line}: duplicate word '{word}'")]
    Duplicate { line: usize, word: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    /// Builds a table from in-memory pairs, applying the same checks as the
    /// file loader (line numbers are 1-based positions in `entries`).
    pub fn from_entries(
        entries: impl IntoIterator<Item = (String, Vec<f64>)>,
    ) -> Result<Self, EmbeddingError> {
        let mut table = EmbeddingTable::default();
        for (k, (word, v)) in entries.into_iter().enumerate() {
            table.insert(k + 1, word, v)?;
        }
        Ok(table)
    }

    fn insert(&mut self, line: usize, word: String, v: Vec<f64>) -> Result<(), EmbeddingError> {
        if self.vectors.is_empty() {
            self.dim = v.len();
        } else if v.len() != self.dim {
            return Err(EmbeddingError::Ragged {
                line,
                expected: self.dim,
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(EmbeddingError::NonFinite { line });
        }
        if self.vectors.contains_key(&word) {
            return Err(EmbeddingError::Duplicate { line, word });
        }
        self.vectors.insert(word, v);
        Ok(())
    }
}

/// Text format: one `word v1 v2 ... vd` entry per line. Blank lines are skipped.
pub fn parse_embeddings(reader: impl BufRead) -> Result<EmbeddingTable, EmbeddingError> {
    let mut table = EmbeddingTable::default();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let values = fields
            .map(|f| {
                f.parse::<f64>().map_err(|_| EmbeddingError::NonNumeric {
                    line: k + 1,
                    field: f.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        table.insert(k + 1, word.to_string(), values)?;
    }
    Ok(table)
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable, EmbeddingError> {
    parse_embeddings(BufReader::new(File::open(path)?))
}

/// Lowercased word counts over all tokens of `corpus`, skipping punctuation
/// and stopwords.
pub fn word_frequencies(corpus: &Corpus, stopwords: &Stopwords) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for doc in &corpus.documents {
        for token in &doc.document.tokens {
            if is_punctuation(&token.text) {
                continue;
            }
            let w = token.text.to_lowercase();
            if !stopwords.contains(&w) {
                *counts.entry(w).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// Words occurring at least `min_freq` times.
pub fn vocabulary(corpus: &Corpus, stopwords: &Stopwords, min_freq: usize) -> Vec<String> {
    word_frequencies(corpus, stopwords)
        .into_iter()
        .filter(|&(_, n)| n >= min_freq)
        .map(|(w, _)| w)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub clusters: ClusterMap,
    pub distance_threshold: f64,
    /// Vocabulary words without an embedding.
    pub missing: Vec<String>,
    /// Words whose vector has zero norm.
    pub zero_norm: Vec<String>,
}

impl ClusterAssignment {
    /// Cluster id to sorted member words.
    pub fn members(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (w, c) in &self.clusters {
            out.entry(c.as_str()).or_default().push(w.as_str());
        }
        out
    }
}

pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (1.0 - dot / (na * nb)).max(0.0)
}

/// Clusters `vocabulary` and cuts the dendrogram at `distance_threshold`.
///
/// Words are sorted before clustering, so the result does not depend on the
/// input order. Ids are `c0`, `c1`, ... ordered by each cluster's smallest
/// word; singleton clusters get ids too.
pub fn cluster_words(
    table: &EmbeddingTable,
    vocabulary: &[String],
    distance_threshold: f64,
) -> ClusterAssignment {
    let words: BTreeSet<&str> = vocabulary.iter().map(String::as_str).collect();
    let mut missing = Vec::new();
    let mut zero_norm = Vec::new();
    let mut points: Vec<(&str, &[f64])> = Vec::new();
    for w in words {
        match table.get(w) {
            None => missing.push(w.to_string()),
            Some(v) if v.iter().all(|&x| x == 0.0) => {
                log::warn!("embedding for '{w}' has zero norm; left unclustered");
                zero_norm.push(w.to_string());
            }
            Some(v) => points.push((w, v)),
        }
    }
    let labels = cut(&points, distance_threshold);
    let mut first_word: BTreeMap<usize, &str> = BTreeMap::new();
    for (&(w, _), &l) in points.iter().zip(&labels) {
        first_word.entry(l).or_insert(w);
    }
    let mut ordered: Vec<(&str, usize)> = first_word.into_iter().map(|(l, w)| (w, l)).collect();
    ordered.sort();
    let id_of: BTreeMap<usize, String> = ordered
        .iter()
        .enumerate()
        .map(|(k, &(_, l))| (l, format!("c{k}")))
        .collect();
    let clusters = points
        .iter()
        .zip(&labels)
        .map(|(&(w, _), l)| (w.to_string(), id_of[l].clone()))
        .collect();
    ClusterAssignment {
        clusters,
        distance_threshold,
        missing,
        zero_norm,
    }
}

/// Flat cluster label per point.
fn cut(points: &[(&str, &[f64])], threshold: f64) -> Vec<usize> {
    let n = points.len();
    if n < 2 {
        return (0..n).collect();
    }
    let mut condensed = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            condensed.push(cosine_distance(points[i].1, points[j].1));
        }
    }
    let dendrogram = linkage(&mut condensed, n, Method::Complete);
    // Union-find over the n leaves plus one node per merge step.
    let mut parent: Vec<usize> = (0..n + dendrogram.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (k, step) in dendrogram.steps().iter().enumerate() {
        if step.dissimilarity > threshold {
            // Complete linkage has no inversions, so later steps are higher.
            break;
        }
        let node = n + k;
        for child in [step.cluster1, step.cluster2] {
            let r = find(&mut parent, child);
            parent[r] = node;
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(entries: &[(&str, &[f64])]) -> EmbeddingTable {
        EmbeddingTable::from_entries(entries.iter().map(|(w, v)| (w.to_string(), v.to_vec()))).unwrap()
    }

    fn words(ws: &[&str]) -> Vec<String> {
        ws.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn loads_text_format() {
        let t = parse_embeddings("a 1 2 3 4\nb 0 1 0 1\n\nc -1 0.5 2e-1 3\n".as_bytes()).unwrap();
        assert_eq!((t.len(), t.dim()), (3, 4));
        assert_eq!(t.get("c"), Some(&[-1.0, 0.5, 0.2, 3.0][..]));
        assert!(parse_embeddings("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn loader_errors_carry_line_numbers() {
        let err = parse_embeddings("a 1 2 3\nb 1 2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, EmbeddingError::Ragged { line: 2, expected: 3, found: 2 }));
        let err = parse_embeddings("a 1 x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, EmbeddingError::NonNumeric { line: 1, .. }));
        let err = parse_embeddings("a 1\na 2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, EmbeddingError::Duplicate { line: 2, .. }));
        let err = parse_embeddings("a NaN\n".as_bytes()).unwrap_err();
        assert!(matches!(err, EmbeddingError::NonFinite { line: 1 }));
    }

    #[test]
    fn therapy_words_form_one_cluster() {
        let t = table(&[
            ("radiotherapy", &[0.9, 0.1, 0.05, 0.0]),
            ("chemotherapy", &[0.85, 0.15, 0.1, 0.0]),
            ("adjuvant", &[0.8, 0.2, 0.0, 0.05]),
            ("immunotherapy", &[0.88, 0.12, 0.08, 0.02]),
            ("river", &[0.0, 0.0, 1.0, 0.2]),
        ]);
        let a = cluster_words(
            &t,
            &words(&["radiotherapy", "chemotherapy", "adjuvant", "immunotherapy", "river"]),
            DEFAULT_DISTANCE_THRESHOLD,
        );
        let members = a.members();
        assert_eq!(members.len(), 2);
        assert_eq!(members["c0"], vec!["adjuvant", "chemotherapy", "immunotherapy", "radiotherapy"]);
        assert_eq!(members["c1"], vec!["river"]);
    }

    #[test]
    fn identical_and_orthogonal_vectors() {
        let t = table(&[("a", &[1.0, 2.0]), ("b", &[1.0, 2.0])]);
        let a = cluster_words(&t, &words(&["a", "b"]), 1e-6);
        assert_eq!(a.clusters["a"], a.clusters["b"]);

        let t = table(&[("x", &[1.0, 0.0, 0.0]), ("y", &[0.0, 1.0, 0.0]), ("z", &[0.0, 0.0, 1.0])]);
        let a = cluster_words(&t, &words(&["x", "y", "z"]), 0.5);
        assert_eq!(a.members().len(), 3);
    }

    #[test]
    fn missing_and_zero_vectors_are_reported() {
        let t = table(&[("a", &[1.0, 0.0]), ("z", &[0.0, 0.0])]);
        let a = cluster_words(&t, &words(&["a", "q", "z"]), 0.4);
        assert_eq!(a.missing, vec!["q"]);
        assert_eq!(a.zero_norm, vec!["z"]);
        assert_eq!(a.clusters.len(), 1);
        assert!(cluster_words(&EmbeddingTable::default(), &[], 0.4).clusters.is_empty());
    }

    #[test]
    fn vocabulary_respects_cutoff() {
        let corpus = crate::fixtures::news_corpus();
        let v = vocabulary(&corpus, &Stopwords::default(), 3);
        assert!(v.contains(&"of".to_string()));
        assert!(!v.contains(&"the".to_string()));
        assert!(!v.contains(&"svanholm".to_string()));
        let freqs = word_frequencies(&corpus, &Stopwords::default());
        assert_eq!(freqs["of"], 7);
        assert!(!freqs.contains_key(","));
    }

    /// Naive complete linkage: recompute all cluster-pair maxima each round.
    fn reference(points: &[Vec<f64>], threshold: f64) -> (Vec<f64>, Vec<BTreeSet<usize>>) {
        let mut clusters: Vec<BTreeSet<usize>> = (0..points.len()).map(|i| [i].into()).collect();
        let mut heights = Vec::new();
        let mut cut: Option<Vec<BTreeSet<usize>>> = None;
        while clusters.len() > 1 {
            let mut best = (f64::INFINITY, 0, 0);
            for a in 0..clusters.len() {
                for b in a + 1..clusters.len() {
                    let d = clusters[a]
                        .iter()
                        .flat_map(|&i| clusters[b].iter().map(move |&j| (i, j)))
                        .map(|(i, j)| cosine_distance(&points[i], &points[j]))
                        .fold(0.0, f64::max);
                    if d < best.0 {
                        best = (d, a, b);
                    }
                }
            }
            if best.0 > threshold && cut.is_none() {
                cut = Some(clusters.clone());
            }
            heights.push(best.0);
            let merged = clusters.remove(best.2);
            clusters[best.1].extend(merged);
        }
        (heights, cut.unwrap_or(clusters))
    }

    fn point_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (2..=8usize).prop_flat_map(|n| {
            prop::collection::vec(prop::collection::vec(0.05f64..1.0, 3), n)
        })
    }

    proptest! {
        #[test]
        fn matches_exhaustive_reference(points in point_strategy(), threshold in 0.0f64..0.3) {
            let names: Vec<String> = (0..points.len()).map(|i| format!("w{i}")).collect();
            let t = EmbeddingTable::from_entries(names.iter().cloned().zip(points.iter().cloned())).unwrap();

            let mut condensed = Vec::new();
            for i in 0..points.len() {
                for j in i + 1..points.len() {
                    condensed.push(cosine_distance(&points[i], &points[j]));
                }
            }
            let dendrogram = linkage(&mut condensed, points.len(), Method::Complete);
            let heights: Vec<f64> = dendrogram.steps().iter().map(|s| s.dissimilarity).collect();
            let (expected_heights, expected_cut) = reference(&points, threshold);
            prop_assert_eq!(heights.len(), expected_heights.len());
            for (h, e) in heights.iter().zip(&expected_heights) {
                prop_assert!((h - e).abs() < 1e-12, "{} vs {}", h, e);
            }

            let a = cluster_words(&t, &names, threshold);
            let mut actual: Vec<BTreeSet<usize>> = a
                .members()
                .values()
                .map(|ws| ws.iter().map(|w| w[1..].parse::<usize>().unwrap()).collect())
                .collect();
            let mut expected_cut = expected_cut;
            actual.sort();
            expected_cut.sort();
            prop_assert_eq!(actual, expected_cut);
        }

        #[test]
        fn permutation_invariant(points in point_strategy(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let names: Vec<String> = (0..points.len()).map(|i| format!("w{i}")).collect();
            let t = EmbeddingTable::from_entries(names.iter().cloned().zip(points.iter().cloned())).unwrap();
            let mut shuffled = names.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(cluster_words(&t, &names, 0.1), cluster_words(&t, &shuffled, 0.1));
        }

        #[test]
        fn clusters_respect_threshold(points in point_strategy(), threshold in 0.0f64..0.5) {
            let names: Vec<String> = (0..points.len()).map(|i| format!("w{i}")).collect();
            let t = EmbeddingTable::from_entries(names.iter().cloned().zip(points.iter().cloned())).unwrap();
            let a = cluster_words(&t, &names, threshold);
            for ws in a.members().values() {
                for x in ws {
                    for y in ws {
                        prop_assert!(cosine_distance(t.get(x).unwrap(), t.get(y).unwrap()) <= threshold + 1e-12);
                    }
                }
            }
        }
    }
}
