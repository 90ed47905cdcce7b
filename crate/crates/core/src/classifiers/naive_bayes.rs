//! Gaussian Naive Bayes on raw features.
//!
//! Per class and feature a Gaussian is fit by the class-conditional mean
//! and population variance, floored at 1e-9 so constant features survive.
//! Priors are class frequencies; the score is the posterior P(malicious | x)
//! computed in log space.

use crate::featurizer::Label;

pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct NbParams {
    /// Priors indexed by class (0 = benign, 1 = malicious); they sum to 1.
    pub priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
}

pub(super) fn fit(rows: &[Vec<f64>], labels: &[Label]) -> NbParams {
    let dims = rows[0].len();
    let mut counts = [0usize; 2];
    let mut sums = [vec![0.0; dims], vec![0.0; dims]];
    for (row, label) in rows.iter().zip(labels) {
        let c = label.as_u8() as usize;
        counts[c] += 1;
        for (j, &v) in row.iter().enumerate() {
            sums[c][j] += v;
        }
    }
    let means = [
        sums[0].iter().map(|s| s / counts[0] as f64).collect::<Vec<_>>(),
        sums[1].iter().map(|s| s / counts[1] as f64).collect::<Vec<_>>(),
    ];
    let mut sq = [vec![0.0; dims], vec![0.0; dims]];
    for (row, label) in rows.iter().zip(labels) {
        let c = label.as_u8() as usize;
        for (j, &v) in row.iter().enumerate() {
            let d = v - means[c][j];
            sq[c][j] += d * d;
        }
    }
    let variances = [
        sq[0]
            .iter()
            .map(|s| (s / counts[0] as f64).max(VARIANCE_FLOOR))
            .collect::<Vec<_>>(),
        sq[1]
            .iter()
            .map(|s| (s / counts[1] as f64).max(VARIANCE_FLOOR))
            .collect::<Vec<_>>(),
    ];
    let n = rows.len() as f64;
    NbParams {
        priors: [counts[0] as f64 / n, counts[1] as f64 / n],
        means,
        variances,
    }
}

impl NbParams {
    fn log_joint(&self, class: usize, features: &[f64]) -> f64 {
        let mut lp = self.priors[class].ln();
        for (j, &x) in features.iter().enumerate() {
            let mean = self.means[class][j];
            let var = self.variances[class][j];
            let d = x - mean;
            lp += -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + d * d / var);
        }
        lp
    }

    /// Posterior probability of the malicious class.
    pub fn score(&self, features: &[f64]) -> f64 {
        let log_benign = self.log_joint(0, features);
        let log_malicious = self.log_joint(1, features);
        let max = log_benign.max(log_malicious);
        let benign = (log_benign - max).exp();
        let malicious = (log_malicious - max).exp();
        malicious / (benign + malicious)
    }
}
