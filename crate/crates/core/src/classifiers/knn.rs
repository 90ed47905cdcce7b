//! k-nearest-neighbor classification on min-max-normalized features.
//!
//! A lazy learner: training stores every normalized instance. Distances are
//! Euclidean; distance ties break toward the lower training-row index, and
//! the score is the fraction of the k nearest neighbors labeled malicious.

use crate::featurizer::Label;

use super::HyperParams;

#[derive(Debug, Clone, PartialEq)]
pub struct KnnParams {
    pub k: usize,
    pub instances: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

pub(super) fn fit(rows: &[Vec<f64>], labels: &[Label], hp: &HyperParams) -> KnnParams {
    KnnParams {
        k: hp.k,
        instances: rows.to_vec(),
        labels: labels.to_vec(),
    }
}

impl KnnParams {
    /// Fraction of the k nearest stored instances labeled malicious.
    pub fn score(&self, features: &[f64]) -> f64 {
        let mut distances: Vec<(f64, usize)> = self
            .instances
            .iter()
            .enumerate()
            .map(|(i, inst)| {
                let d2 = inst
                    .iter()
                    .zip(features)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
                (d2, i)
            })
            .collect();
        distances.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k = self.k.min(distances.len());
        let malicious = distances[..k]
            .iter()
            .filter(|&&(_, i)| self.labels[i].is_malicious())
            .count();
        malicious as f64 / k as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{train_on_features, Algorithm, HyperParams, ModelParams};
    use crate::featurizer::{FeatureSetConfig, FeatureVector};

    fn fv(values: [f64; 4]) -> FeatureVector {
        FeatureVector {
            length: values[0].max(1.0) as usize,
            hyphens: values[1] as usize,
            digits: values[2] as usize,
            entropy: values[3],
            label: None,
        }
    }

    #[test]
    fn nearest_instance_wins_with_k1() {
        let rows = [fv([0.0, 0.0, 0.0, 0.0]), fv([1.0, 1.0, 1.0, 1.0])];
        let refs: Vec<&FeatureVector> = rows.iter().collect();
        let labels = vec![Label::Benign, Label::Malicious];
        let hp = HyperParams::defaults(Algorithm::Knn);
        let model =
            train_on_features(&refs, &labels, &hp, FeatureSetConfig::with_entropy()).unwrap();
        assert_eq!(
            model.predict_features(&[0.9, 0.9, 0.9, 0.9]).unwrap(),
            Label::Malicious
        );
        assert_eq!(
            model.predict_features(&[0.1, 0.0, 0.0, 0.1]).unwrap(),
            Label::Benign
        );
    }

    #[test]
    fn model_stores_every_training_instance() {
        let rows: Vec<FeatureVector> = (0..7)
            .map(|i| fv([i as f64, 0.0, 0.0, 0.0]))
            .collect();
        let refs: Vec<&FeatureVector> = rows.iter().collect();
        let labels: Vec<Label> = (0..7)
            .map(|i| if i % 2 == 0 { Label::Benign } else { Label::Malicious })
            .collect();
        let hp = HyperParams::defaults(Algorithm::Knn);
        let model =
            train_on_features(&refs, &labels, &hp, FeatureSetConfig::with_entropy()).unwrap();
        match model.params() {
            ModelParams::Knn(p) => {
                assert_eq!(p.instances.len(), 7);
                assert_eq!(p.labels.len(), 7);
            }
            other => panic!("unexpected params {other:?}"),
        }
    }

    #[test]
    fn k1_memorizes_its_training_set() {
        let rows: Vec<FeatureVector> = (0..20)
            .map(|i| fv([i as f64, (i % 3) as f64, (i % 2) as f64, i as f64 / 7.0]))
            .collect();
        let refs: Vec<&FeatureVector> = rows.iter().collect();
        let labels: Vec<Label> = (0..20)
            .map(|i| if i < 10 { Label::Benign } else { Label::Malicious })
            .collect();
        let hp = HyperParams::defaults(Algorithm::Knn);
        let model =
            train_on_features(&refs, &labels, &hp, FeatureSetConfig::with_entropy()).unwrap();
        for (row, &label) in rows.iter().zip(&labels) {
            assert_eq!(model.predict(row).unwrap(), label);
        }
    }

    #[test]
    fn score_is_neighbor_fraction() {
        // k=5 around the origin: 4 of the 5 nearest are malicious
        let rows = [
            fv([0.0, 0.0, 0.0, 0.0]),
            fv([1.0, 0.0, 0.0, 0.0]),
            fv([0.0, 1.0, 0.0, 0.0]),
            fv([0.0, 0.0, 1.0, 0.0]),
            fv([0.0, 0.0, 0.0, 1.0]),
            fv([9.0, 9.0, 9.0, 9.0]),
        ];
        let refs: Vec<&FeatureVector> = rows.iter().collect();
        let labels = vec![
            Label::Benign,
            Label::Malicious,
            Label::Malicious,
            Label::Malicious,
            Label::Malicious,
            Label::Benign,
        ];
        let mut hp = HyperParams::defaults(Algorithm::Knn);
        hp.k = 5;
        let model =
            train_on_features(&refs, &labels, &hp, FeatureSetConfig::with_entropy()).unwrap();
        let score = model.score_features(&[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((score - 0.8).abs() < 1e-12);
    }

    #[test]
    fn distance_ties_break_toward_lower_index() {
        // both instances sit at the same distance from the query; index 0 wins
        let rows = [fv([2.0, 0.0, 0.0, 0.0]), fv([4.0, 0.0, 0.0, 0.0])];
        let refs: Vec<&FeatureVector> = rows.iter().collect();
        let labels = vec![Label::Benign, Label::Malicious];
        let hp = HyperParams::defaults(Algorithm::Knn);
        let model =
            train_on_features(&refs, &labels, &hp, FeatureSetConfig::with_entropy()).unwrap();
        assert_eq!(
            model.predict_features(&[3.0, 0.0, 0.0, 0.0]).unwrap(),
            Label::Benign
        );
    }

    #[test]
    fn even_k_vote_tie_goes_benign() {
        let rows = [
            fv([0.0, 0.0, 0.0, 0.0]),
            fv([2.0, 0.0, 0.0, 0.0]),
        ];
        let refs: Vec<&FeatureVector> = rows.iter().collect();
        let labels = vec![Label::Benign, Label::Malicious];
        let mut hp = HyperParams::defaults(Algorithm::Knn);
        hp.k = 2;
        let model =
            train_on_features(&refs, &labels, &hp, FeatureSetConfig::with_entropy()).unwrap();
        let score = model.score_features(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((score - 0.5).abs() < 1e-12);
        assert_eq!(
            model.predict_features(&[1.0, 0.0, 0.0, 0.0]).unwrap(),
            Label::Benign
        );
    }
}
