//! Stratified k-fold cross-validation, confusion-matrix metrics, ROC-AUC,
//! and the with/without-entropy comparison report.
//!
//! Metrics treat malicious as the positive class. Fold evaluation pools the
//! per-fold confusion counts and scores before computing the reported
//! metrics (micro aggregation); per-fold metrics are retained alongside.

mod report;

pub use report::{compare_report, render_rows, ComparisonReport, ReportRow};

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::classifiers::{train_on_features, HyperParams, ModelError, TrainError};
use crate::featurizer::{FeatureSetConfig, FeatureVector, Label};
use crate::ingestion::LabeledDataset;
use crate::seeding::{sha256_hex, substream_rng};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("fold count must be >= 2, got {0}")]
    InvalidFoldCount(usize),
    #[error("class {label} has {count} rows, fewer than the {k} folds")]
    ClassTooSmall {
        label: Label,
        count: usize,
        k: usize,
    },
    #[error("fold plan covers {plan_rows} rows but the dataset has {dataset_rows}")]
    PlanMismatch {
        plan_rows: usize,
        dataset_rows: usize,
    },
    #[error("scores contain a single class; AUC is undefined")]
    SingleClassScores,
    #[error("non-finite score")]
    NonFiniteScore,
    #[error("training failed in fold {fold}: {source}")]
    FoldTrain { fold: usize, source: TrainError },
    #[error("prediction failed in fold {fold}: {source}")]
    FoldPredict { fold: usize, source: ModelError },
    #[error("no algorithms requested")]
    NoAlgorithms,
}

/// Assignment of every dataset row to one of k folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignments: Vec<usize>,
    seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    /// Row indices outside and inside the given fold.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (row, &assigned) in self.assignments.iter().enumerate() {
            if assigned == fold {
                test.push(row);
            } else {
                train.push(row);
            }
        }
        (train, test)
    }

    /// Content hash of the plan; identical plans hash identically.
    pub fn plan_hash(&self) -> String {
        let mut canonical = format!("k={};seed={};", self.k, self.seed);
        for a in &self.assignments {
            canonical.push_str(&a.to_string());
            canonical.push(',');
        }
        sha256_hex(canonical.as_bytes())
    }
}

/// Build a stratified fold plan: each class is shuffled with a seeded
/// substream and dealt round-robin, so per-class fold sizes differ by at
/// most one and folds partition the dataset.
pub fn stratified_folds(ds: &LabeledDataset, k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidFoldCount(k));
    }
    let mut assignments = vec![0usize; ds.len()];
    for class in [Label::Benign, Label::Malicious] {
        let mut indices: Vec<usize> = ds
            .rows()
            .iter()
            .enumerate()
            .filter(|(_, row)| row.label == class)
            .map(|(i, _)| i)
            .collect();
        if indices.len() < k {
            return Err(EvalError::ClassTooSmall {
                label: class,
                count: indices.len(),
                k,
            });
        }
        let mut rng = substream_rng(seed, &format!("folds/{class}"));
        indices.shuffle(&mut rng);
        for (position, &row) in indices.iter().enumerate() {
            assignments[row] = position % k;
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
    })
}

/// Confusion counts with malicious as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl ConfusionMatrix {
    pub fn add(&mut self, predicted: Label, truth: Label) {
        match (predicted, truth) {
            (Label::Malicious, Label::Malicious) => self.true_pos += 1,
            (Label::Malicious, Label::Benign) => self.false_pos += 1,
            (Label::Benign, Label::Benign) => self.true_neg += 1,
            (Label::Benign, Label::Malicious) => self.false_neg += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        self.true_pos += other.true_pos;
        self.false_pos += other.false_pos;
        self.true_neg += other.true_neg;
        self.false_neg += other.false_neg;
    }
}

/// Evaluation metrics; a `None` marks an undefined value (rendered "N/A",
/// never coerced to 0).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalMetrics {
    pub tp_rate: Option<f64>,
    pub fp_rate: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub roc_auc: Option<f64>,
}

/// Rates from confusion counts: tp_rate = tp/(tp+fn), fp_rate = fp/(fp+tn),
/// precision = tp/(tp+fp), recall = tp_rate. A zero denominator leaves the
/// affected rate undefined. `roc_auc` is not computable from counts and is
/// left unset.
pub fn compute_metrics(cm: &ConfusionMatrix) -> EvalMetrics {
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            None
        } else {
            Some(num as f64 / den as f64)
        }
    };
    let tp_rate = ratio(cm.true_pos, cm.true_pos + cm.false_neg);
    EvalMetrics {
        tp_rate,
        fp_rate: ratio(cm.false_pos, cm.false_pos + cm.true_neg),
        precision: ratio(cm.true_pos, cm.true_pos + cm.false_pos),
        recall: tp_rate,
        roc_auc: None,
    }
}

fn check_scores(scores: &[(f64, Label)]) -> Result<(usize, usize), EvalError> {
    if scores.iter().any(|(s, _)| !s.is_finite()) {
        return Err(EvalError::NonFiniteScore);
    }
    let positives = scores.iter().filter(|(_, l)| l.is_malicious()).count();
    let negatives = scores.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::SingleClassScores);
    }
    Ok((positives, negatives))
}

/// ROC-AUC as the Mann-Whitney statistic: the probability that a random
/// malicious instance outscores a random benign one, with ties worth 0.5.
/// Computed through average ranks.
pub fn roc_auc_mann_whitney(scores: &[(f64, Label)]) -> Result<f64, EvalError> {
    let (positives, negatives) = check_scores(scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].0.total_cmp(&scores[b].0));

    // average rank over each tie group (ranks are 1-based)
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]].0 == scores[order[start]].0 {
            end += 1;
        }
        let average_rank = (start + 1 + end + 1) as f64 / 2.0;
        for &idx in &order[start..=end] {
            if scores[idx].1.is_malicious() {
                rank_sum_pos += average_rank;
            }
        }
        start = end + 1;
    }

    let p = positives as f64;
    let n = negatives as f64;
    let u = rank_sum_pos - p * (p + 1.0) / 2.0;
    Ok(u / (p * n))
}

/// ROC-AUC as the trapezoidal area under the ranked ROC curve, sweeping
/// thresholds across distinct score values. Agrees with the Mann-Whitney
/// route to floating-point accuracy.
pub fn roc_auc_trapezoidal(scores: &[(f64, Label)]) -> Result<f64, EvalError> {
    let (positives, negatives) = check_scores(scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].0.total_cmp(&scores[a].0));

    let p = positives as f64;
    let n = negatives as f64;
    let mut auc = 0.0;
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut prev_tpr = 0.0;
    let mut prev_fpr = 0.0;
    let mut i = 0;
    while i < order.len() {
        // consume the whole tie group before emitting a curve point
        let value = scores[order[i]].0;
        while i < order.len() && scores[order[i]].0 == value {
            if scores[order[i]].1.is_malicious() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let tpr = tp as f64 / p;
        let fpr = fp as f64 / n;
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        prev_tpr = tpr;
        prev_fpr = fpr;
    }
    // the curve necessarily ends at (1, 1) once every instance is consumed
    Ok(auc)
}

/// Primary ROC-AUC computation (the Mann-Whitney route).
pub fn roc_auc(scores: &[(f64, Label)]) -> Result<f64, EvalError> {
    roc_auc_mann_whitney(scores)
}

/// Evaluation options. `parity_downsample` replicates the protocol that
/// draws equal-size class groups: within each fold's training rows the
/// majority class is downsampled (seeded) to the minority size. Test folds
/// are never touched.
#[derive(Debug, Clone, Copy, Default)]
pub struct CvOptions {
    pub parity_downsample: bool,
}

/// Cross-validation outcome: pooled metrics over all folds plus the
/// retained per-fold metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub pooled: EvalMetrics,
    pub pooled_confusion: ConfusionMatrix,
    pub per_fold: Vec<EvalMetrics>,
}

pub fn cross_validate(
    ds: &LabeledDataset,
    hp: &HyperParams,
    fs: FeatureSetConfig,
    plan: &FoldPlan,
) -> Result<CvResult, EvalError> {
    cross_validate_with_options(ds, hp, fs, plan, CvOptions::default())
}

/// For each fold: train on every row outside it, evaluate on the fold.
/// Per-fold confusion counts and scores are pooled, then the reported
/// metrics are computed on the pooled counts.
pub fn cross_validate_with_options(
    ds: &LabeledDataset,
    hp: &HyperParams,
    fs: FeatureSetConfig,
    plan: &FoldPlan,
    options: CvOptions,
) -> Result<CvResult, EvalError> {
    if plan.assignments.len() != ds.len() {
        return Err(EvalError::PlanMismatch {
            plan_rows: plan.assignments.len(),
            dataset_rows: ds.len(),
        });
    }
    let rows = ds.rows();
    let mut pooled_confusion = ConfusionMatrix::default();
    let mut pooled_scores: Vec<(f64, Label)> = Vec::with_capacity(ds.len());
    let mut per_fold = Vec::with_capacity(plan.k);

    for fold in 0..plan.k {
        let (mut train_idx, test_idx) = plan.split(fold);
        if options.parity_downsample {
            train_idx = parity_downsample(&train_idx, rows, plan.seed, fold);
        }
        let train_rows: Vec<&FeatureVector> =
            train_idx.iter().map(|&i| &rows[i].features).collect();
        let train_labels: Vec<Label> = train_idx.iter().map(|&i| rows[i].label).collect();
        let model = train_on_features(&train_rows, &train_labels, hp, fs)
            .map_err(|source| EvalError::FoldTrain { fold, source })?;

        let mut fold_confusion = ConfusionMatrix::default();
        let mut fold_scores = Vec::with_capacity(test_idx.len());
        for &i in &test_idx {
            let features = rows[i].features.numeric(fs);
            let score = model
                .score_features(&features)
                .map_err(|source| EvalError::FoldPredict { fold, source })?;
            let predicted = model
                .predict_features(&features)
                .map_err(|source| EvalError::FoldPredict { fold, source })?;
            fold_confusion.add(predicted, rows[i].label);
            fold_scores.push((score, rows[i].label));
        }

        let mut fold_metrics = compute_metrics(&fold_confusion);
        fold_metrics.roc_auc = roc_auc(&fold_scores).ok();
        per_fold.push(fold_metrics);
        pooled_confusion.merge(&fold_confusion);
        pooled_scores.extend(fold_scores);
    }

    let mut pooled = compute_metrics(&pooled_confusion);
    pooled.roc_auc = Some(roc_auc(&pooled_scores)?);
    Ok(CvResult {
        pooled,
        pooled_confusion,
        per_fold,
    })
}

/// Downsample the majority class among the given training rows to the
/// minority size, seeded per fold; row order is preserved.
fn parity_downsample(
    train_idx: &[usize],
    rows: &[crate::ingestion::DatasetRow],
    seed: u64,
    fold: usize,
) -> Vec<usize> {
    let benign: Vec<usize> = train_idx
        .iter()
        .copied()
        .filter(|&i| rows[i].label == Label::Benign)
        .collect();
    let malicious: Vec<usize> = train_idx
        .iter()
        .copied()
        .filter(|&i| rows[i].label == Label::Malicious)
        .collect();
    let (minority, majority) = if benign.len() <= malicious.len() {
        (benign, malicious)
    } else {
        (malicious, benign)
    };
    let mut rng = substream_rng(seed, &format!("parity/fold{fold}"));
    let mut shuffled = majority;
    shuffled.shuffle(&mut rng);
    let mut kept: Vec<usize> = minority;
    kept.extend(shuffled.into_iter().take(kept.len()));
    kept.sort_unstable();
    kept
}
