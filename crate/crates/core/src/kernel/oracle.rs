//! Brute-force kernels by enumeration of index tuples. Exponential; used as
//! ground truth for the dynamic programs.

use super::KernelError;
use crate::seqrep::{common_count, GeneralizedToken};

/// Longest sequence the oracle accepts.
pub const MAX_ORACLE_LEN: usize = 12;

/// One pair of index tuples with a nonzero product of common counts.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTerm {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
    /// `λ^{spread(i)+spread(j)} · Π c(s[i_k], t[j_k])`.
    pub weight: f64,
}

impl OracleTerm {
    /// True when some position matches `E_arg` in both sequences.
    pub fn matches_arg(&self, s: &[GeneralizedToken], t: &[GeneralizedToken], arg: usize) -> bool {
        self.i
            .iter()
            .zip(&self.j)
            .any(|(&p, &q)| s[p] == GeneralizedToken::Arg(arg) && t[q] == GeneralizedToken::Arg(arg))
    }
}

fn combinations(len: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, len: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for x in start..len {
            if len - x < n - cur.len() {
                break;
            }
            cur.push(x);
            rec(x + 1, len, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, len, n, &mut Vec::with_capacity(n), &mut out);
    out
}

fn spread(idx: &[usize]) -> i32 {
    (idx[idx.len() - 1] - idx[0] + 1) as i32
}

/// All contributing terms for length `n`.
pub fn oracle_terms(
    s: &[GeneralizedToken],
    t: &[GeneralizedToken],
    n: usize,
    lambda: f64,
) -> Result<Vec<OracleTerm>, KernelError> {
    if n < 1 {
        return Err(KernelError::LengthTooShort { n, min: 1 });
    }
    for len in [s.len(), t.len()] {
        if len > MAX_ORACLE_LEN {
            return Err(KernelError::TooLong {
                len,
                max: MAX_ORACLE_LEN,
            });
        }
    }
    let ci = combinations(s.len(), n);
    let cj = combinations(t.len(), n);
    let mut terms = Vec::new();
    for i in &ci {
        for j in &cj {
            let prod: u32 = i
                .iter()
                .zip(j)
                .map(|(&p, &q)| common_count(&s[p], &t[q]))
                .product();
            if prod > 0 {
                terms.push(OracleTerm {
                    i: i.clone(),
                    j: j.clone(),
                    weight: lambda.powi(spread(i) + spread(j)) * f64::from(prod),
                });
            }
        }
    }
    Ok(terms)
}

pub fn oracle_gsk(
    s: &[GeneralizedToken],
    t: &[GeneralizedToken],
    n: usize,
    lambda: f64,
) -> Result<f64, KernelError> {
    Ok(oracle_terms(s, t, n, lambda)?.iter().map(|x| x.weight).sum())
}

/// Sum over terms that match both `E_a` and `E_b`. Unlike [`super::csk`], any
/// `n ≥ 1` is accepted so that the length constraint can be toggled.
pub fn oracle_csk(
    s: &[GeneralizedToken],
    t: &[GeneralizedToken],
    n: usize,
    lambda: f64,
    a: usize,
    b: usize,
) -> Result<f64, KernelError> {
    if a == b {
        return Err(KernelError::SameArguments(a));
    }
    Ok(oracle_terms(s, t, n, lambda)?
        .iter()
        .filter(|x| x.matches_arg(s, t, a) && x.matches_arg(s, t, b))
        .map(|x| x.weight)
        .sum())
}
