//! L2-regularized logistic regression on raw features, fit by full-batch
//! gradient descent with Armijo backtracking on the step size.
//!
//! The loss is the mean negative log-likelihood plus (ridge/2)·||w||²; the
//! ridge excludes the intercept. Coefficients start at zero and descent
//! stops when the gradient max-norm falls below the tolerance or after
//! `max_iters` iterations.

use crate::featurizer::Label;

use super::HyperParams;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticParams {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean negative log-likelihood plus the ridge penalty (intercept excluded).
pub fn loss(weights: &[f64], bias: f64, rows: &[Vec<f64>], labels: &[Label], ridge: f64) -> f64 {
    let n = rows.len() as f64;
    let mut total = 0.0;
    for (row, label) in rows.iter().zip(labels) {
        let z = bias + dot(weights, row);
        // -[y ln(sigma) + (1-y) ln(1-sigma)] = log1p_exp(z) - y*z
        total += log1p_exp(z) - label.as_f64() * z;
    }
    total / n + 0.5 * ridge * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Analytic gradient of [`loss`] with respect to (weights, bias).
pub fn gradient(
    weights: &[f64],
    bias: f64,
    rows: &[Vec<f64>],
    labels: &[Label],
    ridge: f64,
) -> (Vec<f64>, f64) {
    let n = rows.len() as f64;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (row, label) in rows.iter().zip(labels) {
        let err = sigmoid(bias + dot(weights, row)) - label.as_f64();
        for (g, &x) in grad_w.iter_mut().zip(row) {
            *g += err * x;
        }
        grad_b += err;
    }
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + ridge * w;
    }
    (grad_w, grad_b / n)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(super) fn fit(rows: &[Vec<f64>], labels: &[Label], hp: &HyperParams) -> LogisticParams {
    let dims = rows[0].len();
    let mut weights = vec![0.0; dims];
    let mut bias = 0.0;
    let mut current_loss = loss(&weights, bias, rows, labels, hp.ridge);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..hp.max_iters {
        iterations = iter + 1;
        let (grad_w, grad_b) = gradient(&weights, bias, rows, labels, hp.ridge);
        let max_norm = grad_w
            .iter()
            .chain(std::iter::once(&grad_b))
            .fold(0.0f64, |m, g| m.max(g.abs()));
        if max_norm <= hp.tolerance {
            converged = true;
            iterations = iter;
            break;
        }

        // Armijo backtracking: halve the step until it yields sufficient
        // decrease. g_sq is the squared gradient norm.
        let g_sq = grad_w.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b;
        let mut step = 1.0;
        loop {
            let candidate_w: Vec<f64> = weights
                .iter()
                .zip(&grad_w)
                .map(|(w, g)| w - step * g)
                .collect();
            let candidate_b = bias - step * grad_b;
            let candidate_loss = loss(&candidate_w, candidate_b, rows, labels, hp.ridge);
            if candidate_loss <= current_loss - 1e-4 * step * g_sq {
                weights = candidate_w;
                bias = candidate_b;
                current_loss = candidate_loss;
                break;
            }
            step *= 0.5;
            if step < 1e-15 {
                // no descent direction at working precision
                return LogisticParams {
                    weights,
                    bias,
                    converged: max_norm <= hp.tolerance,
                    iterations,
                };
            }
        }
    }

    LogisticParams {
        weights,
        bias,
        converged,
        iterations,
    }
}

impl LogisticParams {
    /// Sigmoid of the linear score: P(malicious | x).
    pub fn score(&self, features: &[f64]) -> f64 {
        sigmoid(self.bias + dot(&self.weights, features))
    }
}
