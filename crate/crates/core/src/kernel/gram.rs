//! Gram matrices of `csk_final` values.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{KernelError, KernelParams, PreparedSeq};
use crate::seqrep::SequenceRepresentation;

/// Prepares every sequence; all must share one arity.
pub fn prepare_all(
    seqs: &[SequenceRepresentation],
    params: KernelParams,
) -> Result<Vec<PreparedSeq>, KernelError> {
    if let Some(first) = seqs.first() {
        if let Some(bad) = seqs.iter().find(|s| s.arity != first.arity) {
            return Err(KernelError::ArityMismatch(first.arity, bad.arity));
        }
    }
    map_maybe_parallel(seqs, |s| PreparedSeq::new(&s.tokens, s.arity, params))
        .into_iter()
        .collect()
}

fn map_maybe_parallel<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Symmetric matrix `M[i][j] = csk_final(seqs[i], seqs[j])`. Only the upper
/// triangle is evaluated; the lower one is a mirror.
pub fn gram_matrix(
    seqs: &[SequenceRepresentation],
    params: KernelParams,
) -> Result<Vec<Vec<f64>>, KernelError> {
    gram_matrix_prepared(&prepare_all(seqs, params)?)
}

pub fn gram_matrix_prepared(prepared: &[PreparedSeq]) -> Result<Vec<Vec<f64>>, KernelError> {
    let n = prepared.len();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values = map_maybe_parallel(&cells, |&(i, j)| prepared[i].csk_final(&prepared[j]));
    let mut m = vec![vec![0.0; n]; n];
    for (&(i, j), v) in cells.iter().zip(values) {
        let v = v?;
        m[i][j] = v;
        m[j][i] = v;
    }
    Ok(m)
}

/// `rows[i][j] = csk_final(queries[i], supports[j])`.
pub fn kernel_rows(
    queries: &[PreparedSeq],
    supports: &[PreparedSeq],
) -> Result<Vec<Vec<f64>>, KernelError> {
    map_maybe_parallel(queries, |q| {
        supports.iter().map(|s| q.csk_final(s)).collect::<Result<Vec<_>, _>>()
    })
    .into_iter()
    .collect()
}
