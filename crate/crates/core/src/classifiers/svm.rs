//! Linear soft-margin SVM fit by SMO-style pairwise updates on the dual.
//!
//! Works on min-max-normalized features. Each iteration picks the
//! maximal-violating pair (Keerthi working-set selection), solves the
//! two-variable subproblem analytically, and maintains the primal weight
//! vector so linear-kernel evaluations stay O(dims). Optimization stops
//! when the KKT violation gap falls below the tolerance or after
//! `max_iters` pair updates. The score is the signed margin w·x + b.

use crate::featurizer::Label;

use super::HyperParams;

#[derive(Debug, Clone, PartialEq)]
pub struct SvmParams {
    /// Primal weights in the normalized feature space.
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Number of training points with nonzero dual weight.
    pub support_count: usize,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(super) fn fit(rows: &[Vec<f64>], labels: &[Label], hp: &HyperParams) -> SvmParams {
    let n = rows.len();
    let dims = rows[0].len();
    let c = hp.c;
    let y: Vec<f64> = labels
        .iter()
        .map(|l| if l.is_malicious() { 1.0 } else { -1.0 })
        .collect();

    let mut alpha = vec![0.0f64; n];
    let mut weights = vec![0.0f64; dims];
    let mut iterations = 0;
    let mut final_gap_mid = 0.0;

    for iter in 0..hp.max_iters {
        iterations = iter;
        // F_t = y_t - w·x_t; optimality requires
        // max over I_up of F <= min over I_low of F (within tolerance)
        let mut up_best: Option<(f64, usize)> = None;
        let mut low_best: Option<(f64, usize)> = None;
        for t in 0..n {
            let f_t = y[t] - dot(&weights, &rows[t]);
            let positive = y[t] > 0.0;
            let in_up = (alpha[t] < c && positive) || (alpha[t] > 0.0 && !positive);
            let in_low = (alpha[t] < c && !positive) || (alpha[t] > 0.0 && positive);
            if in_up && up_best.is_none_or(|(best, _)| f_t > best) {
                up_best = Some((f_t, t));
            }
            if in_low && low_best.is_none_or(|(best, _)| f_t < best) {
                low_best = Some((f_t, t));
            }
        }
        let (m, i) = match up_best {
            Some(v) => v,
            None => break,
        };
        let (m_low, j) = match low_best {
            Some(v) => v,
            None => break,
        };
        final_gap_mid = (m + m_low) / 2.0;
        if m - m_low <= hp.tolerance {
            break;
        }

        // two-variable subproblem on (i, j)
        let k_ii = dot(&rows[i], &rows[i]);
        let k_jj = dot(&rows[j], &rows[j]);
        let k_ij = dot(&rows[i], &rows[j]);
        let eta = (k_ii + k_jj - 2.0 * k_ij).max(1e-12);
        // E_t = w·x_t - y_t = -F_t
        let e_i = dot(&weights, &rows[i]) - y[i];
        let e_j = dot(&weights, &rows[j]) - y[j];

        let (low, high) = if y[i] != y[j] {
            ((alpha[j] - alpha[i]).max(0.0), (c + alpha[j] - alpha[i]).min(c))
        } else {
            ((alpha[i] + alpha[j] - c).max(0.0), (alpha[i] + alpha[j]).min(c))
        };
        let new_alpha_j = (alpha[j] + y[j] * (e_i - e_j) / eta).clamp(low, high);
        let delta_j = new_alpha_j - alpha[j];
        if delta_j.abs() < 1e-14 {
            break;
        }
        let new_alpha_i = alpha[i] + y[i] * y[j] * (alpha[j] - new_alpha_j);
        let delta_i = new_alpha_i - alpha[i];
        for (w, (&xi, &xj)) in weights.iter_mut().zip(rows[i].iter().zip(rows[j].iter())) {
            *w += delta_i * y[i] * xi + delta_j * y[j] * xj;
        }
        alpha[i] = new_alpha_i;
        alpha[j] = new_alpha_j;
    }

    // bias from the free support vectors, falling back to the violation
    // interval midpoint when every alpha sits on a bound
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for t in 0..n {
        if alpha[t] > 0.0 && alpha[t] < c {
            free_sum += y[t] - dot(&weights, &rows[t]);
            free_count += 1;
        }
    }
    let bias = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        final_gap_mid
    };

    SvmParams {
        weights,
        bias,
        support_count: alpha.iter().filter(|&&a| a > 0.0).count(),
        iterations,
    }
}

impl SvmParams {
    /// Signed margin; positive means malicious.
    pub fn score(&self, features: &[f64]) -> f64 {
        dot(&self.weights, features) + self.bias
    }
}
