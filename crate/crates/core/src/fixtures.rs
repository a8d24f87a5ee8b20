//! Small bundled documents used by tests, the acceptance suite and the demo.

use crate::candidates::CandidateRelationInstance;
use crate::corpus::{parse_corpus, Corpus, RelationSignature};

/// Three-sentence news story about a change of chairmanship.
pub const NEWS_JSONL: &str = include_str!("../data/news_1.jsonl");

/// Three-sentence biomedical abstract with drugs, one gene and mutations.
pub const DRUG_GENE_MUTATION_JSONL: &str = include_str!("../data/drug_gene_mutation.jsonl");

pub fn succession() -> RelationSignature {
    RelationSignature::new("Succession", ["ORG", "POST", "PER", "PER"]).expect("valid signature")
}

pub fn interact() -> RelationSignature {
    RelationSignature::new("Interact", ["Drug", "Gene", "Mutation"]).expect("valid signature")
}

pub fn lives_in() -> RelationSignature {
    RelationSignature::new("Lives_In", ["Bacteria", "Habitat"]).expect("valid signature")
}

pub fn news_corpus() -> Corpus {
    parse_corpus(NEWS_JSONL, Some(&succession())).expect("bundled news fixture is valid")
}

pub fn drug_gene_mutation_corpus() -> Corpus {
    parse_corpus(DRUG_GENE_MUTATION_JSONL, Some(&interact())).expect("bundled biomedical fixture is valid")
}

/// Volvo / chairman / Gyllenhammar (predecessor) / Svanholm (successor).
pub fn news_t1() -> CandidateRelationInstance {
    CandidateRelationInstance::new("news_1.txt", ["ab_volvo", "chairman", "gyllenhammar", "svanholm"])
}

/// ABB / president / Svanholm / Gyllenhammar.
pub fn news_t2() -> CandidateRelationInstance {
    CandidateRelationInstance::new("news_1.txt", ["abb", "president", "svanholm", "gyllenhammar"])
}
