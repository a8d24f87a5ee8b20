//! Seeded synthetic `Lives_In` corpora with a planted cue pattern.
//!
//! Each document mentions two bacteria and two habitats. A bacterium is
//! linked to one habitat with probability `positive_rate`; the link is
//! expressed by a cue template, possibly split over up to `max_cue_gap + 1`
//! sentences. Unlinked bacteria get a distractor sentence with a habitat.
//! About half of the bacteria also appear as a separate entity under their
//! abbreviated form (`S. enterica`), which aliases the full name. Gold holds
//! one tuple per positive group, using a randomly chosen group member.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::corpus::{parse_corpus, Corpus};

pub const RELATION: &str = "Lives_In";

const BACTERIA: [(&str, &str); 12] = [
    ("Salmonella", "enterica"),
    ("Escherichia", "coli"),
    ("Listeria", "monocytogenes"),
    ("Bacillus", "subtilis"),
    ("Vibrio", "cholerae"),
    ("Staphylococcus", "aureus"),
    ("Clostridium", "difficile"),
    ("Pseudomonas", "aeruginosa"),
    ("Streptococcus", "pneumoniae"),
    ("Helicobacter", "pylori"),
    ("Legionella", "pneumophila"),
    ("Mycobacterium", "tuberculosis"),
];

const HABITATS: [&str; 10] = [
    "soil",
    "river water",
    "human gut",
    "hospital surfaces",
    "dairy products",
    "poultry farms",
    "sea sediment",
    "drinking water",
    "plant roots",
    "sewage sludge",
];

/// `B` and `H` mark the bacterium and habitat slots.
const CUES: [&str; 5] = [
    "B was isolated from H",
    "B thrives in H",
    "B colonizes H",
    "B inhabits H",
    "B is commonly found in H",
];

/// Two-sentence cues: the first part names the bacterium, the second the
/// habitat.
const SPLIT_CUES: [(&str, &str); 3] = [
    ("B was cultured", "it was isolated from H"),
    ("B was characterized", "it thrives in H"),
    ("B grew rapidly", "it colonizes H"),
];

const DISTRACTORS: [&str; 4] = [
    "B was compared with strains unrelated to H",
    "H is unlikely to harbor B",
    "reports on B rarely mention H",
    "B was never recovered despite extensive surveys of H",
];

const FILLERS: [&str; 4] = [
    "samples were collected over two seasons",
    "strains were cultured under standard conditions",
    "sequencing confirmed the identifications",
    "statistics were computed per site",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSpec {
    pub docs: usize,
    pub seed: u64,
    /// Probability that a bacterium is linked to a habitat.
    pub positive_rate: f64,
    /// Probability that a bacterium also appears as an abbreviated entity.
    pub alias_rate: f64,
    /// Cue parts may be separated by up to this many filler sentences.
    pub max_cue_gap: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            docs: 200,
            seed: 7,
            positive_rate: 0.8,
            alias_rate: 0.5,
            max_cue_gap: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthStats {
    /// (bacterium group, habitat) pairs over all documents.
    pub candidate_groups: usize,
    pub positive_groups: usize,
}

impl SynthStats {
    pub fn positive_fraction(&self) -> f64 {
        if self.candidate_groups == 0 {
            0.0
        } else {
            self.positive_groups as f64 / self.candidate_groups as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub corpus: Corpus,
    pub stats: SynthStats,
}

enum Piece {
    Words(String),
    Mention(String, String),
}

struct DocBuilder {
    sentences: Vec<Vec<String>>,
    /// entity id → (type, surface, mentions as (sentence, start, end)).
    entities: Vec<(String, &'static str, String, Vec<(usize, usize, usize)>)>,
}

impl DocBuilder {
    fn entity(&mut self, id: &str, ty: &'static str, surface: &str) {
        self.entities.push((id.into(), ty, surface.into(), Vec::new()));
    }

    fn surface(&self, id: &str) -> Piece {
        let e = self.entities.iter().find(|e| e.0 == id).expect("declared entity");
        Piece::Mention(id.into(), e.2.clone())
    }

    fn sentence(&mut self, pieces: Vec<Piece>) {
        let index = self.sentences.len();
        let mut tokens: Vec<String> = Vec::new();
        for p in pieces {
            match p {
                Piece::Words(w) => tokens.extend(w.split_whitespace().map(String::from)),
                Piece::Mention(id, surface) => {
                    let start = tokens.len();
                    tokens.extend(surface.split_whitespace().map(String::from));
                    let e = self.entities.iter_mut().find(|e| e.0 == id).expect("declared entity");
                    e.3.push((index, start, tokens.len()));
                }
            }
        }
        tokens.push(".".into());
        self.sentences.push(tokens);
    }

    /// Fills a template, substituting the `B` and `H` words.
    fn template(&self, text: &str, b: &str, h: &str) -> Vec<Piece> {
        let mut pieces = Vec::new();
        let mut words: Vec<&str> = Vec::new();
        let flush = |words: &mut Vec<&str>, pieces: &mut Vec<Piece>| {
            if !words.is_empty() {
                pieces.push(Piece::Words(words.join(" ")));
                words.clear();
            }
        };
        for w in text.split_whitespace() {
            let slot = match w {
                "B" => Some(b),
                "H" => Some(h),
                _ => None,
            };
            match slot {
                Some(id) => {
                    flush(&mut words, &mut pieces);
                    pieces.push(self.surface(id));
                }
                None => words.push(w),
            }
        }
        flush(&mut words, &mut pieces);
        pieces
    }
}

fn capitalized(mut pieces: Vec<Piece>) -> Vec<Piece> {
    if let Some(Piece::Words(w)) = pieces.first_mut() {
        let mut c = w.chars();
        if let Some(first) = c.next() {
            *w = first.to_uppercase().chain(c).collect();
        }
    }
    pieces
}

/// Generates the corpus and counts groups while doing so.
pub fn synth_corpus(spec: &SynthSpec) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut lines = Vec::new();
    let mut stats = SynthStats::default();
    for d in 0..spec.docs {
        let doc_id = format!("syn{d:04}");
        let bacteria: Vec<(&str, &str)> = BACTERIA.choose_multiple(&mut rng, 2).copied().collect();
        let habitats: Vec<&str> = HABITATS.choose_multiple(&mut rng, 2).copied().collect();

        let mut b = DocBuilder {
            sentences: Vec::new(),
            entities: Vec::new(),
        };
        // Per bacterium: the ids of its group.
        let mut groups: Vec<Vec<String>> = Vec::new();
        for (k, (genus, species)) in bacteria.iter().enumerate() {
            let id = format!("b{k}");
            b.entity(&id, "Bacteria", &format!("{genus} {species}"));
            let mut group = vec![id];
            if rng.gen_bool(spec.alias_rate) {
                let short = format!("{}. {species}", &genus[..1]);
                let vid = format!("b{k}v");
                b.entity(&vid, "Bacteria", &short);
                group.push(vid);
            }
            groups.push(group);
        }
        for (k, h) in habitats.iter().enumerate() {
            b.entity(&format!("h{k}"), "Habitat", h);
        }

        let intro = vec![
            b.surface("b0"),
            Piece::Words("and".into()),
            b.surface("b1"),
            Piece::Words("were examined in this study".into()),
        ];
        b.sentence(intro);

        let mut habitat_used = [false; 2];
        let mut gold = Vec::new();
        for group in &groups {
            // The intro uses the full name, so a variant entity gets its only
            // mention here.
            let mention = group.last().expect("non-empty group").clone();
            let h = rng.gen_range(0..2);
            let hid = format!("h{h}");
            habitat_used[h] = true;
            if rng.gen_bool(spec.positive_rate) {
                gold.push((group.choose(&mut rng).expect("non-empty group").clone(), hid.clone()));
                if rng.gen_bool(0.3) {
                    let (first, second) = SPLIT_CUES.choose(&mut rng).expect("cues");
                    let p = capitalized(b.template(first, &mention, &hid));
                    b.sentence(p);
                    for _ in 0..rng.gen_range(0..=spec.max_cue_gap) {
                        b.sentence(capitalized(vec![Piece::Words(FILLERS.choose(&mut rng).expect("fillers").to_string())]));
                    }
                    let p = capitalized(b.template(second, &mention, &hid));
                    b.sentence(p);
                } else {
                    let p = capitalized(b.template(CUES.choose(&mut rng).expect("cues"), &mention, &hid));
                    b.sentence(p);
                }
            } else {
                let p = capitalized(b.template(DISTRACTORS.choose(&mut rng).expect("distractors"), &mention, &hid));
                b.sentence(p);
            }
            if rng.gen_bool(0.3) {
                b.sentence(capitalized(vec![Piece::Words(FILLERS.choose(&mut rng).expect("fillers").to_string())]));
            }
        }
        for (h, used) in habitat_used.iter().enumerate() {
            if !used {
                let p = vec![b.surface(&format!("h{h}")), Piece::Words("was sampled at several sites".into())];
                b.sentence(capitalized(p));
            }
        }

        let positive: BTreeSet<(usize, String)> = gold
            .iter()
            .map(|(bid, hid)| (groups.iter().position(|g| g.contains(bid)).expect("known id"), hid.clone()))
            .collect();
        stats.candidate_groups += groups.len() * habitats.len();
        stats.positive_groups += positive.len();

        lines.push(json!({"kind": "document", "doc_id": doc_id, "sentences": b.sentences}).to_string());
        for (id, ty, _, mentions) in &b.entities {
            let ms: Vec<_> = mentions
                .iter()
                .map(|&(s, a, e)| json!({"sentence_index": s, "token_start": a, "token_end": e}))
                .collect();
            lines.push(
                json!({"kind": "entity", "doc_id": doc_id, "entity_id": id, "entity_type": ty, "mentions": ms})
                    .to_string(),
            );
        }
        for (bid, hid) in gold {
            lines.push(
                json!({"kind": "relation", "doc_id": doc_id, "relation_name": RELATION, "arg_entity_ids": [bid, hid]})
                    .to_string(),
            );
        }
    }
    let corpus = parse_corpus(&lines.join("\n"), None).expect("generated corpus is well formed");
    SynthCorpus { corpus, stats }
}
