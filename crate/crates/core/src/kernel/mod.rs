//! Subsequence kernels over generalized sequences.
//!
//! * [`gsk`]: λ-weighted count of common subsequences of length `n`.
//! * [`csk`]: the same count restricted to subsequences in which `E_a` is
//!   matched to `E_a` and `E_b` to `E_b` at some positions, for `n ≥ 3`.
//! * [`csk_pairsum`], [`ncsk`], [`csk_final`]: sum over argument pairs,
//!   cosine normalization, and the length-weighted combination used by the
//!   SVM.

pub mod check;
mod dp;
mod gram;
pub mod oracle;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seqrep::GeneralizedToken;

pub use dp::{CskDpState, Table};
pub use gram::{gram_matrix, gram_matrix_prepared, kernel_rows, prepare_all};
pub use oracle::{oracle_csk, oracle_gsk, oracle_terms, OracleTerm, MAX_ORACLE_LEN};

pub const DEFAULT_LAMBDA: f64 = 0.9;
pub const DEFAULT_N_PRIME: usize = 4;
/// Shortest subsequence the constrained kernel counts.
pub const MIN_CSK_LENGTH: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("subsequence length {n} is below the minimum {min}")]
    LengthTooShort { n: usize, min: usize },
    #[error("constrained kernel needs two distinct arguments, got E{0} twice")]
    SameArguments(usize),
    #[error("argument index must be at least 1")]
    ZeroArgument,
    #[error("arity {0} is below 2")]
    ArityTooSmall(usize),
    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(usize, usize),
    #[error("lambda must lie in (0, 1], got {0}")]
    InvalidLambda(f64),
    #[error("combination bound must be at least 3, got {0}")]
    InvalidNPrime(usize),
    #[error("sequence of length {len} exceeds the oracle limit {max}")]
    TooLong { len: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelParams {
    pub lambda: f64,
    /// Largest subsequence length combined by [`csk_final`].
    pub n_prime: usize,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            lambda: DEFAULT_LAMBDA,
            n_prime: DEFAULT_N_PRIME,
        }
    }
}

impl KernelParams {
    pub fn new(lambda: f64, n_prime: usize) -> Result<Self, KernelError> {
        let p = KernelParams { lambda, n_prime };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        check_lambda(self.lambda)?;
        if self.n_prime < MIN_CSK_LENGTH {
            return Err(KernelError::InvalidNPrime(self.n_prime));
        }
        Ok(())
    }

    /// `2^{N'-k}` for `k = 3..=N'`.
    pub fn length_weights(&self) -> Vec<f64> {
        (MIN_CSK_LENGTH..=self.n_prime)
            .map(|k| 2f64.powi((self.n_prime - k) as i32))
            .collect()
    }
}

fn check_lambda(lambda: f64) -> Result<(), KernelError> {
    if lambda.is_finite() && lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(KernelError::InvalidLambda(lambda))
    }
}

fn check_arity(arity: usize) -> Result<(), KernelError> {
    if arity < 2 {
        Err(KernelError::ArityTooSmall(arity))
    } else {
        Ok(())
    }
}

/// Orders a pair canonically so that swapped calls run the identical
/// floating-point computation.
fn canonical<'a>(
    s: &'a [GeneralizedToken],
    t: &'a [GeneralizedToken],
) -> (&'a [GeneralizedToken], &'a [GeneralizedToken]) {
    if s <= t {
        (s, t)
    } else {
        (t, s)
    }
}

fn all_pairs(arity: usize) -> Vec<(usize, usize)> {
    (0..arity)
        .flat_map(|i| (i + 1..arity).map(move |j| (i, j)))
        .collect()
}

pub fn gsk(
    s: &[GeneralizedToken],
    t: &[GeneralizedToken],
    n: usize,
    lambda: f64,
) -> Result<f64, KernelError> {
    if n < 1 {
        return Err(KernelError::LengthTooShort { n, min: 1 });
    }
    check_lambda(lambda)?;
    let (s, t) = canonical(s, t);
    Ok(dp::sweep(s, t, lambda, n, &[], &[]).gsk[n])
}

pub fn csk(
    s: &[GeneralizedToken],
    t: &[GeneralizedToken],
    n: usize,
    lambda: f64,
    a: usize,
    b: usize,
) -> Result<f64, KernelError> {
    if n < MIN_CSK_LENGTH {
        return Err(KernelError::LengthTooShort {
            n,
            min: MIN_CSK_LENGTH,
        });
    }
    if a == 0 || b == 0 {
        return Err(KernelError::ZeroArgument);
    }
    if a == b {
        return Err(KernelError::SameArguments(a));
    }
    check_lambda(lambda)?;
    let (s, t) = canonical(s, t);
    Ok(dp::sweep(s, t, lambda, n, &[a, b], &[(0, 1)]).csk[n][0])
}

/// `Σ_{i<j} csk(s, t, n, λ, i, j)` for every length `1..=max_n`.
fn pairsums_upto(
    s: &[GeneralizedToken],
    t: &[GeneralizedToken],
    lambda: f64,
    max_n: usize,
    arity: usize,
) -> Vec<f64> {
    let (s, t) = canonical(s, t);
    let tracked: Vec<usize> = (1..=arity).collect();
    let sweep = dp::sweep(s, t, lambda, max_n, &tracked, &all_pairs(arity));
    sweep.csk.iter().map(|row| row.iter().sum()).collect()
}

pub fn csk_pairsum(
    s: &[GeneralizedToken],
    t: &[GeneralizedToken],
    n: usize,
    lambda: f64,
    arity: usize,
) -> Result<f64, KernelError> {
    if n < MIN_CSK_LENGTH {
        return Err(KernelError::LengthTooShort {
            n,
            min: MIN_CSK_LENGTH,
        });
    }
    check_lambda(lambda)?;
    check_arity(arity)?;
    Ok(pairsums_upto(s, t, lambda, n, arity)[n])
}

fn normalize(st: f64, ss: f64, tt: f64) -> f64 {
    if ss > 0.0 && tt > 0.0 {
        st / (ss * tt).sqrt()
    } else {
        0.0
    }
}

/// Cosine-normalized pair sum; 0 when either self-kernel is 0.
pub fn ncsk(
    s: &[GeneralizedToken],
    t: &[GeneralizedToken],
    n: usize,
    lambda: f64,
    arity: usize,
) -> Result<f64, KernelError> {
    let st = csk_pairsum(s, t, n, lambda, arity)?;
    let ss = csk_pairsum(s, s, n, lambda, arity)?;
    let tt = csk_pairsum(t, t, n, lambda, arity)?;
    Ok(normalize(st, ss, tt))
}

/// A sequence with its self pair-sums cached for `n = 3..=N'`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSeq {
    tokens: Vec<GeneralizedToken>,
    arity: usize,
    params: KernelParams,
    self_sums: Vec<f64>,
}

impl PreparedSeq {
    pub fn new(tokens: &[GeneralizedToken], arity: usize, params: KernelParams) -> Result<Self, KernelError> {
        params.validate()?;
        check_arity(arity)?;
        let all = pairsums_upto(tokens, tokens, params.lambda, params.n_prime, arity);
        Ok(PreparedSeq {
            tokens: tokens.to_vec(),
            arity,
            params,
            self_sums: all[MIN_CSK_LENGTH..].to_vec(),
        })
    }

    pub fn tokens(&self) -> &[GeneralizedToken] {
        &self.tokens
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// `csk_pairsum(s, s, n)` for `n = 3..=N'`.
    pub fn self_sums(&self) -> &[f64] {
        &self.self_sums
    }

    /// [`csk_final`] against another prepared sequence with the same
    /// parameters.
    pub fn csk_final(&self, other: &PreparedSeq) -> Result<f64, KernelError> {
        if self.arity != other.arity {
            return Err(KernelError::ArityMismatch(self.arity, other.arity));
        }
        let p = self.params;
        let cross = pairsums_upto(&self.tokens, &other.tokens, p.lambda, p.n_prime, self.arity);
        let weights = p.length_weights();
        let total: f64 = weights.iter().sum();
        let combined: f64 = weights
            .iter()
            .enumerate()
            .map(|(k, w)| {
                w * normalize(cross[k + MIN_CSK_LENGTH], self.self_sums[k], other.self_sums[k])
            })
            .sum();
        Ok(combined / total)
    }
}

/// `Σ_{k=3}^{N'} 2^{N'-k} ncsk_k / Σ_{k=3}^{N'} 2^{N'-k}`.
pub fn csk_final(
    s: &[GeneralizedToken],
    t: &[GeneralizedToken],
    params: KernelParams,
    arity: usize,
) -> Result<f64, KernelError> {
    PreparedSeq::new(s, arity, params)?.csk_final(&PreparedSeq::new(t, arity, params)?)
}
