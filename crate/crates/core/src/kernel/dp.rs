//! Dynamic programs for the subsequence kernels.
//!
//! `K'_i(p, q)` is the λ-weighted count of common subsequences of length `i`
//! in the prefixes `s[..p]`, `t[..q]`, where the weight runs from the first
//! matched index to the end of each prefix. `K''_i(p, q)` is the same sum
//! restricted to subsequences whose last index in `s` is `p - 1`. The
//! auxiliary tables restrict the sums further to subsequences that contain a
//! matched `E_a` pair, a matched `E_b` pair, or both.

use crate::seqrep::{common_count, GeneralizedToken};

/// Per-length kernel values from one sweep over a sequence pair.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Sweep {
    /// `gsk[n]` for `n` in `0..=max_n` (index 0 unused).
    pub gsk: Vec<f64>,
    /// `csk[n][k]` for the k-th requested argument pair.
    pub csk: Vec<Vec<f64>>,
}

/// Matrix of `common_count` values, row-major over `s`.
fn common_matrix(s: &[GeneralizedToken], t: &[GeneralizedToken]) -> Vec<f64> {
    let mut c = Vec::with_capacity(s.len() * t.len());
    for x in s {
        for y in t {
            c.push(f64::from(common_count(x, y)));
        }
    }
    c
}

fn slot_of(token: &GeneralizedToken, tracked: &[usize]) -> Option<usize> {
    let i = token.arg_index()?;
    tracked.iter().position(|&a| a == i)
}

/// Computes GSK for all lengths `1..=max_n` and, for each pair `(ka, kb)` of
/// slots into `tracked` argument indices, the constrained kernel.
///
/// Rolling storage: only the level `i - 1` tables are kept while level `i` is
/// built. The final sum for length `i` equals the sum of the terms that feed
/// `K''_i`, so it is accumulated in the same pass.
pub(crate) fn sweep(
    s: &[GeneralizedToken],
    t: &[GeneralizedToken],
    lambda: f64,
    max_n: usize,
    tracked: &[usize],
    pairs: &[(usize, usize)],
) -> Sweep {
    let (m, l) = (s.len(), t.len());
    let mut out = Sweep {
        gsk: vec![0.0; max_n + 1],
        csk: vec![vec![0.0; pairs.len()]; max_n + 1],
    };
    if m == 0 || l == 0 || max_n == 0 {
        return out;
    }
    let c = common_matrix(s, t);
    let s_slot: Vec<Option<usize>> = s.iter().map(|x| slot_of(x, tracked)).collect();
    let t_slot: Vec<Option<usize>> = t.iter().map(|y| slot_of(y, tracked)).collect();
    let w = l + 1;
    let size = (m + 1) * w;
    let na = tracked.len();
    let np = pairs.len();
    let lam2 = lambda * lambda;

    // Level 0: K'_0 = 1 everywhere, auxiliaries 0.
    let mut k_prev = vec![1.0; size];
    let mut a_prev = vec![0.0; size * na];
    let mut ab_prev = vec![0.0; size * np];
    let mut k_cur = vec![0.0; size];
    let mut a_cur = vec![0.0; size * na];
    let mut ab_cur = vec![0.0; size * np];
    let mut a_dd = vec![0.0; na];
    let mut ab_dd = vec![0.0; np];

    for i in 1..=max_n {
        let store = i < max_n;
        let mut total = 0.0;
        let mut pair_total = vec![0.0; np];
        k_cur.fill(0.0);
        a_cur.fill(0.0);
        ab_cur.fill(0.0);
        for p in 1..=m {
            let mut k_dd = 0.0;
            a_dd.fill(0.0);
            ab_dd.fill(0.0);
            for q in 1..=l {
                let cxy = c[(p - 1) * l + (q - 1)];
                let d = (p - 1) * w + (q - 1);
                let here = p * w + q;
                let above = (p - 1) * w + q;
                let matched = match (s_slot[p - 1], t_slot[q - 1]) {
                    (Some(x), Some(y)) if x == y => Some(x),
                    _ => None,
                };

                let term = lam2 * k_prev[d] * cxy;
                total += term;
                k_dd = lambda * k_dd + term;

                for k in 0..na {
                    let term = if matched == Some(k) {
                        lam2 * k_prev[d]
                    } else {
                        lam2 * a_prev[k * size + d] * cxy
                    };
                    a_dd[k] = lambda * a_dd[k] + term;
                }
                for (k, &(ka, kb)) in pairs.iter().enumerate() {
                    let term = if matched == Some(ka) {
                        lam2 * a_prev[kb * size + d]
                    } else if matched == Some(kb) {
                        lam2 * a_prev[ka * size + d]
                    } else {
                        lam2 * ab_prev[k * size + d] * cxy
                    };
                    pair_total[k] += term;
                    ab_dd[k] = lambda * ab_dd[k] + term;
                }

                if store {
                    k_cur[here] = lambda * k_cur[above] + k_dd;
                    for k in 0..na {
                        let o = k * size;
                        a_cur[o + here] = lambda * a_cur[o + above] + a_dd[k];
                    }
                    for k in 0..np {
                        let o = k * size;
                        ab_cur[o + here] = lambda * ab_cur[o + above] + ab_dd[k];
                    }
                }
            }
        }
        out.gsk[i] = total;
        out.csk[i] = pair_total;
        if store {
            std::mem::swap(&mut k_prev, &mut k_cur);
            std::mem::swap(&mut a_prev, &mut a_cur);
            std::mem::swap(&mut ab_prev, &mut ab_cur);
        }
    }
    out
}

/// Prefix-indexed table `[p][q]`.
pub type Table = Vec<Vec<f64>>;

/// Full DP trace for one argument pair `(a, b)`: every table at every
/// length `0..=n-1`, plus the final values. Memory is `O(n·|s|·|t|)`; meant
/// for inspection and invariant checks rather than bulk computation.
#[derive(Debug, Clone, PartialEq)]
pub struct CskDpState {
    pub k_prime: Vec<Table>,
    pub k_dprime: Vec<Table>,
    pub a_k_prime: Vec<Table>,
    pub b_k_prime: Vec<Table>,
    pub ab_k_prime: Vec<Table>,
    pub a_k_dprime: Vec<Table>,
    pub b_k_dprime: Vec<Table>,
    pub ab_k_dprime: Vec<Table>,
    /// Unconstrained kernel of length `n`.
    pub gsk: f64,
    /// Constrained kernel of length `n`.
    pub csk: f64,
}

impl CskDpState {
    /// Runs the recursion literally, one table per function and length.
    pub fn compute(
        s: &[GeneralizedToken],
        t: &[GeneralizedToken],
        n: usize,
        lambda: f64,
        a: usize,
        b: usize,
    ) -> Self {
        let (m, l) = (s.len(), t.len());
        let zero = || vec![vec![0.0; l + 1]; m + 1];
        let levels = n.max(1);
        let mut st = CskDpState {
            k_prime: vec![vec![vec![1.0; l + 1]; m + 1]],
            k_dprime: vec![zero()],
            a_k_prime: vec![zero()],
            b_k_prime: vec![zero()],
            ab_k_prime: vec![zero()],
            a_k_dprime: vec![zero()],
            b_k_dprime: vec![zero()],
            ab_k_dprime: vec![zero()],
            gsk: 0.0,
            csk: 0.0,
        };
        let is = |tok: &GeneralizedToken, i: usize| *tok == GeneralizedToken::Arg(i);
        for i in 1..levels {
            let (mut kp, mut kd) = (zero(), zero());
            let (mut ap, mut ad, mut bp, mut bd, mut abp, mut abd) =
                (zero(), zero(), zero(), zero(), zero(), zero());
            for p in 1..=m {
                for q in 1..=l {
                    let (x, y) = (&s[p - 1], &t[q - 1]);
                    let cxy = f64::from(common_count(x, y));
                    let prev = |tab: &Vec<Table>| tab[i - 1][p - 1][q - 1];
                    let lam2 = lambda * lambda;
                    kd[p][q] = lambda * kd[p][q - 1] + lam2 * prev(&st.k_prime) * cxy;
                    let (ta, tb, tab) = if is(x, a) && is(y, a) {
                        (prev(&st.k_prime), prev(&st.b_k_prime), prev(&st.b_k_prime))
                    } else if is(x, b) && is(y, b) {
                        (prev(&st.a_k_prime), prev(&st.k_prime), prev(&st.a_k_prime))
                    } else {
                        (
                            prev(&st.a_k_prime) * cxy,
                            prev(&st.b_k_prime) * cxy,
                            prev(&st.ab_k_prime) * cxy,
                        )
                    };
                    ad[p][q] = lambda * ad[p][q - 1] + lam2 * ta;
                    bd[p][q] = lambda * bd[p][q - 1] + lam2 * tb;
                    abd[p][q] = lambda * abd[p][q - 1] + lam2 * tab;
                    kp[p][q] = lambda * kp[p - 1][q] + kd[p][q];
                    ap[p][q] = lambda * ap[p - 1][q] + ad[p][q];
                    bp[p][q] = lambda * bp[p - 1][q] + bd[p][q];
                    abp[p][q] = lambda * abp[p - 1][q] + abd[p][q];
                }
            }
            st.k_prime.push(kp);
            st.k_dprime.push(kd);
            st.a_k_prime.push(ap);
            st.b_k_prime.push(bp);
            st.ab_k_prime.push(abp);
            st.a_k_dprime.push(ad);
            st.b_k_dprime.push(bd);
            st.ab_k_dprime.push(abd);
        }
        if n >= 1 {
            let top = n - 1;
            for p in 1..=m {
                for q in 1..=l {
                    let (x, y) = (&s[p - 1], &t[q - 1]);
                    let cxy = f64::from(common_count(x, y));
                    let w = lambda * lambda;
                    st.gsk += w * st.k_prime[top][p - 1][q - 1] * cxy;
                    st.csk += w * if is(x, a) && is(y, a) {
                        st.b_k_prime[top][p - 1][q - 1]
                    } else if is(x, b) && is(y, b) {
                        st.a_k_prime[top][p - 1][q - 1]
                    } else {
                        st.ab_k_prime[top][p - 1][q - 1] * cxy
                    };
                }
            }
        }
        st
    }

    /// Non-negativity and the pointwise bounds
    /// `aK ≤ K`, `bK ≤ K`, `abK ≤ min(aK, bK)` for both table families.
    /// Returns the first violation found.
    pub fn check_bounds(&self, tolerance: f64) -> Result<(), String> {
        let families = [
            ("K'", &self.k_prime, &self.a_k_prime, &self.b_k_prime, &self.ab_k_prime),
            ("K''", &self.k_dprime, &self.a_k_dprime, &self.b_k_dprime, &self.ab_k_dprime),
        ];
        for (name, k, a, b, ab) in families {
            for i in 0..k.len() {
                for p in 0..k[i].len() {
                    for q in 0..k[i][p].len() {
                        let (kv, av, bv, abv) = (k[i][p][q], a[i][p][q], b[i][p][q], ab[i][p][q]);
                        let at = || format!("{name} level {i} at ({p},{q})");
                        if kv < 0.0 || av < 0.0 || bv < 0.0 || abv < 0.0 {
                            return Err(format!("negative entry in {}", at()));
                        }
                        if av > kv + tolerance || bv > kv + tolerance {
                            return Err(format!("single-argument table exceeds {}", at()));
                        }
                        if abv > av.min(bv) + tolerance {
                            return Err(format!("pair table exceeds single tables in {}", at()));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
