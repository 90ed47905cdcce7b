//! Five binary classifiers behind one train/predict/score contract:
//! linear SVM, kNN, Gaussian Naive Bayes, logistic regression, and
//! AdaBoostM1 over one-level decision stumps.
//!
//! Scores rank instances by maliciousness: probabilities for kNN, Naive
//! Bayes, and logistic regression (decision threshold 0.5), signed margins
//! for the SVM, and the normalized weighted vote in [-1, 1] for AdaBoost
//! (threshold 0). At exact threshold equality the tie breaks toward the
//! benign class. Feature min-max normalization is captured from the
//! training rows and applied inside the distance- and margin-sensitive
//! algorithms (kNN, SVM) only; the others consume raw features.

pub mod adaboost;
pub mod knn;
pub mod logistic;
pub mod naive_bayes;
mod persist;
pub mod svm;

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::featurizer::{FeatureSetConfig, FeatureVector, Label};
use crate::ingestion::LabeledDataset;

pub use persist::ModelIoError;

/// The five supported algorithms, in canonical report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Svm,
    Knn,
    NaiveBayes,
    Logistic,
    AdaBoost,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Svm,
        Algorithm::Knn,
        Algorithm::NaiveBayes,
        Algorithm::Logistic,
        Algorithm::AdaBoost,
    ];

    /// Machine-readable tag used in files and on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Svm => "svm",
            Algorithm::Knn => "knn",
            Algorithm::NaiveBayes => "naive_bayes",
            Algorithm::Logistic => "logistic",
            Algorithm::AdaBoost => "adaboost",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Algorithm> {
        Algorithm::ALL.into_iter().find(|a| a.tag() == tag)
    }

    /// Human-readable name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Algorithm::Svm => "SVM",
            Algorithm::Knn => "kNN",
            Algorithm::NaiveBayes => "Naive Bayes",
            Algorithm::Logistic => "Logistic Regression",
            Algorithm::AdaBoost => "AdaBoostM1",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Training hyperparameters. Defaults: kNN k=1; SVM C=1 with KKT
/// tolerance 1e-3; logistic ridge 1e-8 with gradient tolerance 1e-8 and
/// 10,000 iterations; AdaBoost 10 rounds of one-level stumps.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    pub algorithm: Algorithm,
    /// Neighbor count (kNN).
    pub k: usize,
    /// Margin penalty (SVM).
    pub c: f64,
    /// L2 strength (logistic regression).
    pub ridge: f64,
    /// Boosting iterations (AdaBoost).
    pub rounds: usize,
    pub max_iters: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl HyperParams {
    pub fn defaults(algorithm: Algorithm) -> Self {
        let (tolerance, max_iters) = match algorithm {
            Algorithm::Svm => (1e-3, 100_000),
            _ => (1e-8, 10_000),
        };
        HyperParams {
            algorithm,
            k: 1,
            c: 1.0,
            ridge: 1e-8,
            rounds: 10,
            max_iters,
            tolerance,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if self.k < 1 {
            return Err(TrainError::InvalidHyperParam("k must be >= 1".into()));
        }
        if self.c.is_nan() || self.c <= 0.0 {
            return Err(TrainError::InvalidHyperParam("c must be > 0".into()));
        }
        if self.ridge.is_nan() || self.ridge < 0.0 {
            return Err(TrainError::InvalidHyperParam("ridge must be >= 0".into()));
        }
        if self.rounds < 1 {
            return Err(TrainError::InvalidHyperParam("rounds must be >= 1".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(TrainError::InvalidHyperParam(
                "tolerance must be > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperParam(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("dataset has fewer than 2 rows")]
    TooFewRows,
    #[error("single-class dataset: every row is {0}")]
    SingleClass(Label),
    #[error("non-finite feature value in row {row}")]
    NonFinite { row: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("feature dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite feature value")]
    NonFinite,
}

/// Min-max range of one feature, captured from the training rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

impl FeatureRange {
    /// Scale into [0, 1], clamping values outside the training range.
    /// A constant feature maps to 0.
    pub fn scale(&self, value: f64) -> f64 {
        let span = self.max - self.min;
        if span <= 0.0 {
            return 0.0;
        }
        ((value - self.min) / span).clamp(0.0, 1.0)
    }
}

fn compute_ranges(rows: &[Vec<f64>]) -> Vec<FeatureRange> {
    let dims = rows.first().map_or(0, Vec::len);
    (0..dims)
        .map(|j| {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for row in rows {
                min = min.min(row[j]);
                max = max.max(row[j]);
            }
            FeatureRange { min, max }
        })
        .collect()
}

fn scale_row(ranges: &[FeatureRange], row: &[f64]) -> Vec<f64> {
    ranges
        .iter()
        .zip(row)
        .map(|(range, &value)| range.scale(value))
        .collect()
}

/// Algorithm-specific fitted parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Svm(svm::SvmParams),
    Knn(knn::KnnParams),
    NaiveBayes(naive_bayes::NbParams),
    Logistic(logistic::LogisticParams),
    AdaBoost(adaboost::AdaBoostParams),
}

/// An immutable fitted classifier. Safe to share across threads; all
/// methods take `&self`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    algorithm: Algorithm,
    feature_set: FeatureSetConfig,
    /// Per-feature training ranges; present for the normalized algorithms
    /// (kNN, SVM).
    normalization: Option<Vec<FeatureRange>>,
    params: ModelParams,
}

impl TrainedModel {
    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn feature_set(&self) -> FeatureSetConfig {
        self.feature_set
    }

    pub fn normalization(&self) -> Option<&[FeatureRange]> {
        self.normalization.as_deref()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    fn decision_threshold(&self) -> f64 {
        match self.algorithm {
            Algorithm::Svm | Algorithm::AdaBoost => 0.0,
            _ => 0.5,
        }
    }

    /// Ranking score of a raw feature row (higher = more malicious).
    pub fn score_features(&self, features: &[f64]) -> Result<f64, ModelError> {
        let expected = self.feature_set.dimensionality();
        if features.len() != expected {
            return Err(ModelError::DimensionMismatch {
                expected,
                got: features.len(),
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        let processed = match &self.normalization {
            Some(ranges) => scale_row(ranges, features),
            None => features.to_vec(),
        };
        Ok(match &self.params {
            ModelParams::Svm(p) => p.score(&processed),
            ModelParams::Knn(p) => p.score(&processed),
            ModelParams::NaiveBayes(p) => p.score(&processed),
            ModelParams::Logistic(p) => p.score(&processed),
            ModelParams::AdaBoost(p) => p.score(&processed),
        })
    }

    /// Class of a raw feature row: the score thresholded at the algorithm's
    /// decision boundary, ties toward benign.
    pub fn predict_features(&self, features: &[f64]) -> Result<Label, ModelError> {
        let score = self.score_features(features)?;
        Ok(if score > self.decision_threshold() {
            Label::Malicious
        } else {
            Label::Benign
        })
    }

    pub fn score(&self, fv: &FeatureVector) -> Result<f64, ModelError> {
        self.score_features(&fv.numeric(self.feature_set))
    }

    pub fn predict(&self, fv: &FeatureVector) -> Result<Label, ModelError> {
        self.predict_features(&fv.numeric(self.feature_set))
    }

    /// Serialize to the versioned model text format.
    pub fn save(&self, path: &Path) -> Result<(), ModelIoError> {
        persist::save(self, path)
    }

    /// Load a model saved with [`TrainedModel::save`]. The round trip
    /// reproduces bit-identical predictions.
    pub fn load(path: &Path) -> Result<TrainedModel, ModelIoError> {
        persist::load(path)
    }

    pub fn to_model_string(&self) -> String {
        persist::to_string(self)
    }

    pub fn from_model_str(s: &str) -> Result<TrainedModel, ModelIoError> {
        persist::from_str(s)
    }
}

/// Fit a classifier on every row of the dataset.
///
/// Deterministic given the dataset order and hyperparameters. The
/// normalization ranges (where the algorithm uses them) come from these
/// training rows only.
pub fn train(
    ds: &LabeledDataset,
    hp: &HyperParams,
    fs: FeatureSetConfig,
) -> Result<TrainedModel, TrainError> {
    let rows: Vec<&FeatureVector> = ds.rows().iter().map(|r| &r.features).collect();
    let labels: Vec<Label> = ds.rows().iter().map(|r| r.label).collect();
    train_on_features(&rows, &labels, hp, fs)
}

/// Fit on an explicit subset of feature rows; the evaluator uses this for
/// per-fold training.
pub fn train_on_features(
    rows: &[&FeatureVector],
    labels: &[Label],
    hp: &HyperParams,
    fs: FeatureSetConfig,
) -> Result<TrainedModel, TrainError> {
    hp.validate()?;
    if rows.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    if rows.len() < 2 {
        return Err(TrainError::SingleClass(labels[0]));
    }
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(TrainError::SingleClass(labels[0]));
    }

    let matrix: Vec<Vec<f64>> = rows.iter().map(|fv| fv.numeric(fs)).collect();
    for (i, row) in matrix.iter().enumerate() {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(TrainError::NonFinite { row: i });
        }
    }

    let normalized_algorithms = matches!(hp.algorithm, Algorithm::Svm | Algorithm::Knn);
    let (normalization, train_matrix) = if normalized_algorithms {
        let ranges = compute_ranges(&matrix);
        let scaled: Vec<Vec<f64>> = matrix.iter().map(|row| scale_row(&ranges, row)).collect();
        (Some(ranges), scaled)
    } else {
        (None, matrix)
    };

    let params = match hp.algorithm {
        Algorithm::Svm => ModelParams::Svm(svm::fit(&train_matrix, labels, hp)),
        Algorithm::Knn => ModelParams::Knn(knn::fit(&train_matrix, labels, hp)),
        Algorithm::NaiveBayes => ModelParams::NaiveBayes(naive_bayes::fit(&train_matrix, labels)),
        Algorithm::Logistic => ModelParams::Logistic(logistic::fit(&train_matrix, labels, hp)),
        Algorithm::AdaBoost => ModelParams::AdaBoost(adaboost::fit(&train_matrix, labels, hp)),
    };

    Ok(TrainedModel {
        algorithm: hp.algorithm,
        feature_set: fs,
        normalization,
        params,
    })
}
