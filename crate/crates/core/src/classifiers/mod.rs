//! Binary classifiers: a kernel SVM over precomputed `csk_final` values and a
//! logistic-regression (MaxEnt) baseline over sparse features.

pub mod features;
pub mod maxent;
pub mod svm;

use thiserror::Error;

use crate::candidates::Label;
use crate::kernel::KernelError;

pub use features::{extract_features, FeatureVector};
pub use maxent::{predict_maxent, train_maxent, MaxEntConfig, MaxEntModel};
pub use svm::{predict_svm, solve_smo, train_svm, SmoConfig, SmoSolution, SvmModel};

/// Version tag written into model files.
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("training data needs both classes ({positives} positive, {negatives} negative)")]
    SingleClass { positives: usize, negatives: usize },
    #[error("no training data")]
    Empty,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("kernel matrix is entirely zero")]
    DegenerateGram,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Negatives get weight 1 and positives `#neg / #pos`, so both classes carry
/// the same total weight.
pub fn class_balance_weights(labels: &[Label]) -> Result<Vec<f64>, ClassifierError> {
    let positives = labels.iter().filter(|l| l.is_positive()).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(ClassifierError::SingleClass {
            positives,
            negatives,
        });
    }
    let w = negatives as f64 / positives as f64;
    Ok(labels
        .iter()
        .map(|l| if l.is_positive() { w } else { 1.0 })
        .collect())
}
