//! Randomized comparison of the dynamic programs against the oracle.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{csk, gsk, oracle_csk, oracle_gsk, KernelError};
use crate::seqrep::GeneralizedToken;

/// Random sequence of length `1..=max_len` over six base symbols: `E1`,
/// `E2` and four words. Each word carries one of two cluster ids half of the
/// time, so distinct words can still share a symbol.
pub fn random_sequence(rng: &mut impl Rng, max_len: usize) -> Vec<GeneralizedToken> {
    let len = rng.gen_range(1..=max_len.max(1));
    (0..len)
        .map(|_| match rng.gen_range(0..6) {
            0 => GeneralizedToken::Arg(1),
            1 => GeneralizedToken::Arg(2),
            w => {
                let word = format!("w{}", w - 2);
                if rng.gen_bool(0.5) {
                    GeneralizedToken::clustered(word, format!("c{}", w % 2))
                } else {
                    GeneralizedToken::word(word)
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub trials: usize,
    pub comparisons: usize,
    pub max_abs_deviation: f64,
    pub max_rel_deviation: f64,
    /// Comparisons with `|dp - oracle| > tolerance · max(1, oracle)`.
    pub failures: usize,
    pub tolerance: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// For each trial, compares `gsk` for `n = 1..=4` and `csk(·, 1, 2)` for
/// `n = 3, 4` against the oracle.
pub fn run_oracle_check(
    trials: usize,
    max_len: usize,
    lambda: f64,
    seed: u64,
    tolerance: f64,
) -> Result<CheckReport, KernelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport {
        trials,
        comparisons: 0,
        max_abs_deviation: 0.0,
        max_rel_deviation: 0.0,
        failures: 0,
        tolerance,
    };
    let mut record = |dp: f64, oracle: f64| {
        let abs = (dp - oracle).abs();
        let scale = oracle.abs().max(1.0);
        report.comparisons += 1;
        report.max_abs_deviation = report.max_abs_deviation.max(abs);
        report.max_rel_deviation = report.max_rel_deviation.max(abs / scale);
        if abs > tolerance * scale {
            report.failures += 1;
        }
    };
    for _ in 0..trials {
        let s = random_sequence(&mut rng, max_len);
        let t = random_sequence(&mut rng, max_len);
        for n in 1..=4 {
            record(gsk(&s, &t, n, lambda)?, oracle_gsk(&s, &t, n, lambda)?);
        }
        for n in 3..=4 {
            record(csk(&s, &t, n, lambda, 1, 2)?, oracle_csk(&s, &t, n, lambda, 1, 2)?);
        }
    }
    Ok(report)
}
