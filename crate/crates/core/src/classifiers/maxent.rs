//! Binary logistic regression trained with L-BFGS.
//!
//! Objective: `Σ_i w_i [log(1 + e^{z_i}) − y_i z_i] + (l2/2)‖θ‖²` with
//! `z_i = θ·x_i` and `y_i ∈ {0, 1}`. The bias is an always-on feature and is
//! regularized like the other weights.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::features::FeatureVector;
use super::{ClassifierError, MODEL_VERSION};
use crate::candidates::Label;

pub const BIAS_FEATURE: &str = "__bias__";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxEntConfig {
    pub l2: f64,
    /// Stop when the gradient's ∞-norm drops below this.
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    /// L-BFGS history length.
    pub memory: usize,
}

impl Default for MaxEntConfig {
    fn default() -> Self {
        MaxEntConfig {
            l2: 1.0,
            gradient_tolerance: 1e-5,
            max_iterations: 1000,
            memory: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxEntModel {
    pub version: u32,
    /// Feature name to index; dense over `0..weights.len()`.
    pub features: BTreeMap<String, usize>,
    pub weights: Vec<f64>,
    pub l2: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl MaxEntModel {
    pub fn weight(&self, feature: &str) -> Option<f64> {
        self.features.get(feature).map(|&i| self.weights[i])
    }

    /// `θ·x` including the bias; unseen features are ignored.
    pub fn margin(&self, fv: &FeatureVector) -> f64 {
        let bias = self.weight(BIAS_FEATURE).unwrap_or(0.0);
        fv.iter()
            .filter(|(name, _)| name.as_str() != BIAS_FEATURE)
            .filter_map(|(name, v)| self.weight(name).map(|w| w * v))
            .sum::<f64>()
            + bias
    }
}

/// Dense design matrix in sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub rows: Vec<Vec<(usize, f64)>>,
    pub dim: usize,
}

impl Design {
    /// Feature dictionary from the sorted union of names plus the bias.
    pub fn build(vectors: &[FeatureVector]) -> (Self, BTreeMap<String, usize>) {
        let mut names: BTreeMap<String, usize> = BTreeMap::new();
        names.insert(BIAS_FEATURE.to_string(), 0);
        for fv in vectors {
            for name in fv.keys() {
                names.entry(name.clone()).or_insert(0);
            }
        }
        for (i, v) in names.values_mut().enumerate() {
            *v = i;
        }
        let bias = names[BIAS_FEATURE];
        let rows = vectors
            .iter()
            .map(|fv| {
                let mut row: Vec<(usize, f64)> = fv
                    .iter()
                    .filter(|(n, _)| n.as_str() != BIAS_FEATURE)
                    .map(|(n, &v)| (names[n], v))
                    .collect();
                row.push((bias, 1.0));
                row
            })
            .collect();
        let dim = names.len();
        (Design { rows, dim }, names)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Regularized weighted negative log-likelihood and its gradient.
pub fn objective_and_gradient(
    design: &Design,
    targets: &[f64],
    weights: &[f64],
    l2: f64,
    theta: &[f64],
) -> (f64, Vec<f64>) {
    let mut loss = 0.5 * l2 * theta.iter().map(|t| t * t).sum::<f64>();
    let mut grad: Vec<f64> = theta.iter().map(|t| l2 * t).collect();
    for ((row, &y), &w) in design.rows.iter().zip(targets).zip(weights) {
        let z: f64 = row.iter().map(|&(j, v)| theta[j] * v).sum();
        loss += w * (softplus(z) - y * z);
        let r = w * (sigmoid(z) - y);
        for &(j, v) in row {
            grad[j] += r * v;
        }
    }
    (loss, grad)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimizes `f` from `x0` with L-BFGS and Armijo backtracking.
/// Returns the minimizer, iteration count and whether the gradient test
/// passed.
fn lbfgs(
    f: impl Fn(&[f64]) -> (f64, Vec<f64>),
    x0: Vec<f64>,
    config: &MaxEntConfig,
) -> (Vec<f64>, usize, bool) {
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    for iter in 0..config.max_iterations {
        if inf_norm(&g) < config.gradient_tolerance {
            return (x, iter, true);
        }
        // Two-loop recursion for d = −H g.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut d: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }

        let mut step = 1.0;
        let (x_new, f_new, g_new) = loop {
            let cand: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            let (fc, gc) = f(&cand);
            if fc <= fx + 1e-4 * step * slope || step < 1e-20 {
                break (cand, fc, gc);
            }
            step *= 0.5;
        };
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if history.len() == config.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let stalled = f_new >= fx && step < 1e-20;
        x = x_new;
        fx = f_new;
        g = g_new;
        if stalled {
            return (x, iter + 1, inf_norm(&g) < config.gradient_tolerance);
        }
    }
    let ok = inf_norm(&g) < config.gradient_tolerance;
    (x, config.max_iterations, ok)
}

pub fn train_maxent(
    vectors: &[FeatureVector],
    labels: &[Label],
    weights: &[f64],
    config: &MaxEntConfig,
) -> Result<MaxEntModel, ClassifierError> {
    if vectors.is_empty() {
        return Err(ClassifierError::Empty);
    }
    for len in [labels.len(), weights.len()] {
        if len != vectors.len() {
            return Err(ClassifierError::DimensionMismatch {
                expected: vectors.len(),
                found: len,
            });
        }
    }
    let positives = labels.iter().filter(|l| l.is_positive()).count();
    if positives == 0 || positives == labels.len() {
        return Err(ClassifierError::SingleClass {
            positives,
            negatives: labels.len() - positives,
        });
    }
    if !(config.l2.is_finite() && config.l2 >= 0.0) {
        return Err(ClassifierError::InvalidParameter(format!("l2 must be non-negative, got {}", config.l2)));
    }
    let (design, features) = Design::build(vectors);
    let targets: Vec<f64> = labels.iter().map(|l| f64::from(u8::from(l.is_positive()))).collect();
    let (theta, iterations, converged) = lbfgs(
        |theta| objective_and_gradient(&design, &targets, weights, config.l2, theta),
        vec![0.0; design.dim],
        config,
    );
    if !converged {
        log::warn!("MaxEnt training stopped after {iterations} iterations without meeting the gradient tolerance");
    }
    Ok(MaxEntModel {
        version: MODEL_VERSION,
        features,
        weights: theta,
        l2: config.l2,
        converged,
        iterations,
    })
}

/// `(σ(θ·x), probability ≥ 0.5)`.
pub fn predict_maxent(model: &MaxEntModel, fv: &FeatureVector) -> (f64, Label) {
    let p = sigmoid(model.margin(fv));
    (p, Label::from_bool(p >= 0.5))
}
