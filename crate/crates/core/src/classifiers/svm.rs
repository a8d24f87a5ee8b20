//! Soft-margin SVM dual solved by SMO with maximal-violating-pair selection.
//!
//! Dual: maximize `eᵀα − ½ αᵀQα` with `Q_ij = y_i y_j K_ij`,
//! `0 ≤ α_i ≤ C·w_i` and `yᵀα = 0`. Internally the solver minimizes
//! `f(α) = ½ αᵀQα − eᵀα` and tracks its gradient `G = Qα − e`.

use serde::{Deserialize, Serialize};

use super::{ClassifierError, MODEL_VERSION};
use crate::candidates::Label;
use crate::kernel::{gram_matrix_prepared, kernel_rows, prepare_all, KernelParams, PreparedSeq};
use crate::seqrep::SequenceRepresentation;

/// Curvature floor for non-positive pair curvature.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoConfig {
    /// Stop when the maximal KKT violation `m(α) − M(α)` drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Record the dual objective after every iteration.
    #[serde(default)]
    pub record_objective: bool,
}

impl Default for SmoConfig {
    fn default() -> Self {
        SmoConfig {
            tolerance: 1e-3,
            max_iterations: 100_000,
            record_objective: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Decision offset: `f(x) = Σ α_i y_i K(x_i, x) + bias`.
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final maximal KKT violation.
    pub kkt_gap: f64,
    /// Upper bounds `C·w_i`.
    pub bounds: Vec<f64>,
    /// Dual objective after each iteration, when requested.
    pub objective_trace: Option<Vec<f64>>,
}

impl SmoSolution {
    /// `eᵀα − ½ αᵀQα` evaluated from scratch.
    pub fn dual_objective(&self, gram: &[Vec<f64>], y: &[f64]) -> f64 {
        dual_objective(gram, y, &self.alpha)
    }
}

pub fn dual_objective(gram: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * gram[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Maximal KKT violation `m(α) − M(α)` recomputed from scratch.
pub fn kkt_gap(gram: &[Vec<f64>], y: &[f64], bounds: &[f64], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let grad: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| y[i] * y[j] * gram[i][j] * alpha[j]).sum::<f64>() - 1.0)
        .collect();
    let (m, big_m) = violation_extremes(y, bounds, alpha, &grad);
    (m.map(|x| x.0).unwrap_or(f64::NEG_INFINITY) - big_m.map(|x| x.0).unwrap_or(f64::INFINITY)).max(0.0)
}

fn in_up(y: f64, a: f64, c: f64) -> bool {
    (y > 0.0 && a < c) || (y < 0.0 && a > 0.0)
}

fn in_low(y: f64, a: f64, c: f64) -> bool {
    (y > 0.0 && a > 0.0) || (y < 0.0 && a < c)
}

/// `(max_{I_up} −y G, argmax)`, `(min_{I_low} −y G, argmin)`.
fn violation_extremes(
    y: &[f64],
    bounds: &[f64],
    alpha: &[f64],
    grad: &[f64],
) -> (Option<(f64, usize)>, Option<(f64, usize)>) {
    let mut up: Option<(f64, usize)> = None;
    let mut low: Option<(f64, usize)> = None;
    for t in 0..alpha.len() {
        let v = -y[t] * grad[t];
        if in_up(y[t], alpha[t], bounds[t]) && up.is_none_or(|(best, _)| v > best) {
            up = Some((v, t));
        }
        if in_low(y[t], alpha[t], bounds[t]) && low.is_none_or(|(best, _)| v < best) {
            low = Some((v, t));
        }
    }
    (up, low)
}

fn validate_inputs(gram: &[Vec<f64>], y: &[f64], weights: &[f64], c: f64) -> Result<(), ClassifierError> {
    let n = gram.len();
    if n == 0 {
        return Err(ClassifierError::Empty);
    }
    for len in std::iter::once(y.len())
        .chain(std::iter::once(weights.len()))
        .chain(gram.iter().map(Vec::len))
    {
        if len != n {
            return Err(ClassifierError::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(ClassifierError::InvalidParameter(format!("C must be positive, got {c}")));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(ClassifierError::InvalidParameter("instance weights must be positive".into()));
    }
    if y.iter().any(|v| v.abs() != 1.0) {
        return Err(ClassifierError::InvalidParameter("labels must be +1 or -1".into()));
    }
    let positives = y.iter().filter(|&&v| v > 0.0).count();
    if positives == 0 || positives == n {
        return Err(ClassifierError::SingleClass {
            positives,
            negatives: n - positives,
        });
    }
    if gram.iter().flatten().all(|&k| k == 0.0) {
        return Err(ClassifierError::DegenerateGram);
    }
    Ok(())
}

/// Solves the weighted dual for a precomputed kernel matrix. `y` holds ±1.
pub fn solve_smo(
    gram: &[Vec<f64>],
    y: &[f64],
    weights: &[f64],
    c: f64,
    config: &SmoConfig,
) -> Result<SmoSolution, ClassifierError> {
    validate_inputs(gram, y, weights, c)?;
    let n = gram.len();
    let bounds: Vec<f64> = weights.iter().map(|w| c * w).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut trace = config.record_objective.then(Vec::new);
    let objective = |alpha: &[f64], grad: &[f64]| -> f64 {
        0.5 * alpha.iter().zip(grad).map(|(a, g)| a * (1.0 - g)).sum::<f64>()
    };
    let mut last_objective: f64 = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut gap = f64::INFINITY;

    while iterations < config.max_iterations {
        let (up, low) = violation_extremes(y, &bounds, &alpha, &grad);
        let (Some((m, i)), Some((big_m, j))) = (up, low) else {
            gap = 0.0;
            converged = true;
            break;
        };
        gap = m - big_m;
        if gap < config.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let (ci, cj) = (bounds[i], bounds[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (kii, kjj, kij) = (gram[i][i], gram[j][j], gram[i][j]);
        // Curvature along the feasible direction is K_ii + K_jj − 2K_ij in
        // both label cases.
        let curv = (kii + kjj - 2.0 * kij).max(TAU);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / curv;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / curv;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * gram[t][i] * di + y[j] * gram[t][j] * dj);
        }

        let obj = objective(&alpha, &grad);
        debug_assert!(
            obj >= last_objective - 1e-9 * last_objective.abs().max(1.0),
            "dual objective decreased: {last_objective} -> {obj}"
        );
        last_objective = obj;
        if let Some(tr) = trace.as_mut() {
            tr.push(obj);
        }
    }
    if !converged {
        log::warn!(
            "SMO stopped after {iterations} iterations with KKT gap {gap:.3e} (tolerance {:.1e})",
            config.tolerance
        );
    }

    Ok(SmoSolution {
        bias: -rho(y, &bounds, &alpha, &grad),
        alpha,
        iterations,
        converged,
        kkt_gap: gap.max(0.0),
        bounds,
        objective_trace: trace,
    })
}

/// Average of `y G` over free variables, or the midpoint of the feasible
/// interval when none is free.
fn rho(y: &[f64], bounds: &[f64], alpha: &[f64], grad: &[f64]) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum) = (0usize, 0.0);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= bounds[t] {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum += yg;
        }
    }
    if free > 0 {
        sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportVector {
    /// `α_i y_i`.
    pub coef: f64,
    /// Index of the instance in the training set.
    pub index: usize,
    pub sequence: SequenceRepresentation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub version: u32,
    pub kernel: KernelParams,
    pub c: f64,
    pub arity: usize,
    pub bias: f64,
    pub supports: Vec<SupportVector>,
    pub converged: bool,
    pub iterations: usize,
}

impl SvmModel {
    /// Prepares the support sequences for repeated scoring.
    pub fn predictor(&self) -> Result<SvmPredictor<'_>, ClassifierError> {
        let seqs: Vec<SequenceRepresentation> = self.supports.iter().map(|s| s.sequence.clone()).collect();
        Ok(SvmPredictor {
            model: self,
            prepared: prepare_all(&seqs, self.kernel)?,
        })
    }
}

pub struct SvmPredictor<'a> {
    model: &'a SvmModel,
    prepared: Vec<PreparedSeq>,
}

impl SvmPredictor<'_> {
    pub fn score(&self, seq: &SequenceRepresentation) -> Result<f64, ClassifierError> {
        if seq.arity != self.model.arity {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.model.arity,
                found: seq.arity,
            });
        }
        let query = PreparedSeq::new(&seq.tokens, seq.arity, self.model.kernel)?;
        self.score_prepared(&query)
    }

    pub fn score_prepared(&self, query: &PreparedSeq) -> Result<f64, ClassifierError> {
        let mut total = self.model.bias;
        for (sv, p) in self.model.supports.iter().zip(&self.prepared) {
            total += sv.coef * query.csk_final(p)?;
        }
        Ok(total)
    }

    pub fn predict(&self, seq: &SequenceRepresentation) -> Result<(f64, Label), ClassifierError> {
        let s = self.score(seq)?;
        Ok((s, Label::from_bool(s > 0.0)))
    }

    /// Scores many sequences; kernel rows are computed in parallel when
    /// the `parallel` feature is on.
    pub fn score_all(&self, seqs: &[SequenceRepresentation]) -> Result<Vec<f64>, ClassifierError> {
        if let Some(bad) = seqs.iter().find(|s| s.arity != self.model.arity) {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.model.arity,
                found: bad.arity,
            });
        }
        let queries = prepare_all(seqs, self.model.kernel)?;
        let rows = kernel_rows(&queries, &self.prepared)?;
        Ok(rows
            .iter()
            .map(|row| {
                self.model
                    .supports
                    .iter()
                    .zip(row)
                    .fold(self.model.bias, |total, (sv, k)| total + sv.coef * k)
            })
            .collect())
    }
}

/// Builds the Gram matrix and solves the dual. Labels must all be set.
pub fn train_svm(
    seqs: &[SequenceRepresentation],
    labels: &[Label],
    weights: &[f64],
    c: f64,
    kernel: KernelParams,
    config: &SmoConfig,
) -> Result<(SvmModel, SmoSolution), ClassifierError> {
    if seqs.len() != labels.len() {
        return Err(ClassifierError::DimensionMismatch {
            expected: seqs.len(),
            found: labels.len(),
        });
    }
    let prepared = prepare_all(seqs, kernel)?;
    let gram = gram_matrix_prepared(&prepared)?;
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    let solution = solve_smo(&gram, &y, weights, c, config)?;
    let supports = solution
        .alpha
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0.0)
        .map(|(i, &a)| SupportVector {
            coef: a * y[i],
            index: i,
            sequence: seqs[i].clone(),
        })
        .collect();
    let model = SvmModel {
        version: MODEL_VERSION,
        kernel,
        c,
        arity: seqs.first().map_or(0, |s| s.arity),
        bias: solution.bias,
        supports,
        converged: solution.converged,
        iterations: solution.iterations,
    };
    Ok((model, solution))
}

/// One-off scoring; prefer [`SvmModel::predictor`] for many sequences.
pub fn predict_svm(model: &SvmModel, seq: &SequenceRepresentation) -> Result<(f64, Label), ClassifierError> {
    model.predictor()?.predict(seq)
}
