//! Browser demo: kernel explorer, sequence builder and alias check.
//!
//! Each export returns JSON text; `www/index.html` renders it.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use relex_core::config::relation_preset;
use relex_core::corpus::{are_aliases, AliasRuleSet};
use relex_core::fixtures;
use relex_core::kernel::{csk_final, ncsk, KernelParams};
use relex_core::pipeline::{prepare_corpus, Instance, Resources};
use relex_core::seqrep::SequenceRepresentation;

#[derive(Debug, Serialize)]
pub struct KernelResult {
    pub csk_final: f64,
    /// `(n, ncsk_n)` for `n = 3..=n_prime`.
    pub ncsk: Vec<(usize, f64)>,
}

pub fn explore_kernel(s: &str, t: &str, arity: usize, lambda: f64, n_prime: usize) -> Result<KernelResult, String> {
    let params = KernelParams::new(lambda, n_prime).map_err(|e| e.to_string())?;
    let s = SequenceRepresentation::parse(arity, s).map_err(|e| format!("first sequence: {e}"))?;
    let t = SequenceRepresentation::parse(arity, t).map_err(|e| format!("second sequence: {e}"))?;
    for seq in [&s, &t] {
        seq.validate().map_err(|e| e.to_string())?;
    }
    let ncsk = (3..=n_prime)
        .map(|n| ncsk(&s.tokens, &t.tokens, n, lambda, arity).map(|v| (n, v)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    Ok(KernelResult {
        csk_final: csk_final(&s.tokens, &t.tokens, params, arity).map_err(|e| e.to_string())?,
        ncsk,
    })
}

#[derive(Debug, Serialize)]
pub struct NewsCandidate {
    pub args: Vec<String>,
    pub label: String,
    pub minimal_span: usize,
    pub sequence: String,
}

/// Succession candidates of the bundled news story.
pub fn news_candidates() -> Result<Vec<NewsCandidate>, String> {
    let config = relex_core::config::PipelineConfig {
        relation: relation_preset("Succession").map_err(|e| e.to_string())?,
        ..Default::default()
    };
    let prepared = prepare_corpus(&fixtures::news_corpus(), &config, &Resources::default()).map_err(|e| e.to_string())?;
    Ok(prepared
        .instances
        .into_iter()
        .map(|Instance { candidate, minimal_span, sequence, .. }| NewsCandidate {
            args: candidate.arg_entity_ids,
            label: match candidate.label {
                Some(l) if l.is_positive() => "positive".into(),
                _ => "negative".into(),
            },
            minimal_span,
            sequence: sequence.to_string(),
        })
        .collect())
}

pub fn check_alias(a: &str, b: &str, rules: &str) -> Result<bool, String> {
    let rules: AliasRuleSet = rules.parse()?;
    Ok(are_aliases(a, b, rules))
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

/// Sequences use the `a; b; {c1, w}; E1; SB; OE_ORG` text form.
#[wasm_bindgen(js_name = kernel)]
pub fn kernel_js(s: &str, t: &str, arity: usize, lambda: f64, n_prime: usize) -> Result<String, JsError> {
    to_js(explore_kernel(s, t, arity, lambda, n_prime))
}

#[wasm_bindgen(js_name = newsCandidates)]
pub fn news_candidates_js() -> Result<String, JsError> {
    to_js(news_candidates())
}

#[wasm_bindgen(js_name = aliases)]
pub fn aliases_js(a: &str, b: &str, rules: &str) -> Result<bool, JsError> {
    check_alias(a, b, rules).map_err(|e| JsError::new(&e))
}
