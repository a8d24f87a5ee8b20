//! Stopword list for sequence construction.
//!
//! Function words only: articles, pronouns, auxiliaries, conjunctions,
//! determiners and a few clitics. Prepositions are kept out of the list
//! because they carry argument-role information ("of", "by", "after").

use std::collections::BTreeSet;
use std::io::BufRead;

pub const DEFAULT_STOPWORDS: &[&str] = &[
    "'d", "'ll", "'m", "'re", "'s", "'ve", "a", "all", "also", "am", "an", "and", "any", "are",
    "as", "be", "been", "being", "both", "but", "can", "could", "did", "do", "does", "doing",
    "each", "either", "else", "every", "few", "had", "has", "have", "having", "he", "her", "here",
    "hers", "herself", "him", "himself", "his", "how", "i", "if", "is", "it", "its", "itself",
    "just", "may", "me", "might", "mine", "more", "most", "must", "my", "myself", "n't",
    "neither", "no", "nor", "not", "now", "only", "or", "other", "others", "our", "ours",
    "ourselves", "own", "same", "shall", "she", "should", "so", "some", "such", "than", "that",
    "the", "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this",
    "those", "too", "us", "very", "was", "we", "were", "what", "whatever", "when", "whenever",
    "where", "whereas", "wherever", "whether", "which", "whichever", "while", "who", "whoever",
    "whom", "whose", "why", "will", "would", "yet", "you", "your", "yours", "yourself",
    "yourselves", "whereby", "wherein", "thus", "hence", "therefore", "however", "moreover",
    "furthermore", "although", "though", "unless", "because", "since", "once", "again",
    "already", "even", "ever", "much", "many", "several", "another", "anyone", "anything",
    "everyone", "everything", "someone", "something", "nothing", "none", "one's", "oneself",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords {
    words: BTreeSet<String>,
}

impl Default for Stopwords {
    fn default() -> Self {
        Stopwords::from_words(DEFAULT_STOPWORDS.iter().copied())
    }
}

impl Stopwords {
    pub fn empty() -> Self {
        Stopwords {
            words: BTreeSet::new(),
        }
    }

    /// Words are lowercased.
    pub fn from_words<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Self {
        Stopwords {
            words: words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    /// One word per line; blank lines and `#` comments are skipped.
    pub fn from_reader(reader: impl BufRead) -> std::io::Result<Self> {
        let mut words = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let line = line.trim();
            if !line.is_empty() && !line.starts_with('#') {
                words.push(line.to_string());
            }
        }
        Ok(Stopwords::from_words(words))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}
