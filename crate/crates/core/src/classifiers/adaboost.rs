//! AdaBoostM1 over one-level decision stumps on raw features.
//!
//! Each round fits the stump (feature, threshold, polarity) minimizing the
//! weighted error, adds it with stage weight 0.5*ln((1-e)/e), and
//! reweights the rows. A round with weighted error 0 caps its stage weight
//! using e0 = 1e-10 and ends boosting; a best error >= 0.5 stops before
//! adding the stage. The score is the weighted stump vote normalized to
//! [-1, 1].

use crate::featurizer::Label;

use super::HyperParams;

/// Weighted error stand-in for a perfect stump.
pub const EPSILON_FLOOR: f64 = 1e-10;

/// Axis-aligned one-level classifier: votes malicious on one side of a
/// threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    /// +1 votes malicious for values above the threshold, -1 below.
    pub polarity: i8,
}

impl Stump {
    /// Vote in {-1, +1}; +1 means malicious.
    pub fn vote(&self, features: &[f64]) -> f64 {
        let above = features[self.feature] > self.threshold;
        if above == (self.polarity > 0) {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaBoostParams {
    pub stumps: Vec<Stump>,
    pub stage_weights: Vec<f64>,
}

/// The stump minimizing the weighted error, with its error. Candidate
/// thresholds are midpoints between consecutive distinct feature values,
/// scanned in (feature, threshold, polarity) order; the first strictly
/// better candidate wins, which keeps the search deterministic.
fn best_stump(rows: &[Vec<f64>], targets: &[f64], weights: &[f64]) -> (Stump, f64) {
    let dims = rows[0].len();
    let mut best = (
        Stump {
            feature: 0,
            threshold: f64::NEG_INFINITY,
            polarity: 1,
        },
        f64::INFINITY,
    );
    for feature in 0..dims {
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&a, &b| rows[a][feature].total_cmp(&rows[b][feature]).then(a.cmp(&b)));

        // weight of malicious/benign targets below the sweep point
        let total_malicious: f64 = targets
            .iter()
            .zip(weights)
            .filter(|(&t, _)| t > 0.0)
            .map(|(_, &w)| w)
            .sum();
        let total: f64 = weights.iter().sum();
        let mut below_malicious = 0.0;
        let mut below_total = 0.0;

        for window in 0..order.len().saturating_sub(1) {
            let row = order[window];
            below_total += weights[row];
            if targets[row] > 0.0 {
                below_malicious += weights[row];
            }
            let value = rows[row][feature];
            let next_value = rows[order[window + 1]][feature];
            if next_value <= value {
                continue;
            }
            let threshold = (value + next_value) / 2.0;
            // polarity +1: predicts malicious above the threshold.
            // error = malicious weight below + benign weight above
            let error_up = below_malicious + (total - total_malicious) - (below_total - below_malicious);
            let error_down = total - error_up;
            for (polarity, error) in [(1i8, error_up), (-1i8, error_down)] {
                if error < best.1 {
                    best = (
                        Stump {
                            feature,
                            threshold,
                            polarity,
                        },
                        error,
                    );
                }
            }
        }
    }
    (best.0, best.1.max(0.0))
}

pub(super) fn fit(rows: &[Vec<f64>], labels: &[Label], hp: &HyperParams) -> AdaBoostParams {
    let n = rows.len();
    let targets: Vec<f64> = labels
        .iter()
        .map(|l| if l.is_malicious() { 1.0 } else { -1.0 })
        .collect();
    let mut weights = vec![1.0 / n as f64; n];
    let mut stumps = Vec::new();
    let mut stage_weights = Vec::new();

    for _ in 0..hp.rounds {
        let (stump, error) = best_stump(rows, &targets, &weights);
        if !error.is_finite() || error >= 0.5 {
            break;
        }
        if error <= 0.0 {
            let stage = 0.5 * ((1.0 - EPSILON_FLOOR) / EPSILON_FLOOR).ln();
            stumps.push(stump);
            stage_weights.push(stage);
            break;
        }
        let stage = 0.5 * ((1.0 - error) / error).ln();
        stumps.push(stump);
        stage_weights.push(stage);

        let mut sum = 0.0;
        for ((w, row), &target) in weights.iter_mut().zip(rows).zip(&targets) {
            *w *= (-stage * target * stump.vote(row)).exp();
            sum += *w;
        }
        for w in &mut weights {
            *w /= sum;
        }
    }

    // an empty ensemble can only arise when even the best stump is no
    // better than chance on the first round; keep it and vote benign
    AdaBoostParams {
        stumps,
        stage_weights,
    }
}

impl AdaBoostParams {
    /// Weighted vote normalized to [-1, 1]; positive means malicious.
    pub fn score(&self, features: &[f64]) -> f64 {
        let total: f64 = self.stage_weights.iter().sum();
        if total <= 0.0 {
            return -1.0;
        }
        let vote: f64 = self
            .stumps
            .iter()
            .zip(&self.stage_weights)
            .map(|(stump, stage)| stage * stump.vote(features))
            .sum();
        vote / total
    }
}
