//! N-ary cross-sentence relation extraction.
//!
//! Candidates are turned into generalized token sequences, compared with a
//! constrained subsequence kernel, and classified by a kernel SVM or a
//! logistic-regression baseline. Evaluation works on groups of similar
//! instances.

pub mod candidates;
pub mod classifiers;
pub mod clusters;
pub mod config;
pub mod corpus;
pub mod evaluation;
pub mod fixtures;
pub mod kernel;
pub mod pipeline;
pub mod seqrep;
pub mod synth;

/// The global worker pool could not be configured.
#[derive(Debug, thiserror::Error)]
#[error("cannot configure {threads} worker threads: {message}")]
pub struct ThreadPoolError {
    pub threads: usize,
    pub message: String,
}

/// Sizes the worker pool used for Gram matrices and batch scoring. Without
/// the `parallel` feature everything runs on the calling thread and this
/// only validates `threads`.
pub fn set_threads(threads: usize) -> Result<(), ThreadPoolError> {
    if threads == 0 {
        return Err(ThreadPoolError {
            threads,
            message: "need at least one".into(),
        });
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| ThreadPoolError {
            threads,
            message: e.to_string(),
        })?;
    Ok(())
}
