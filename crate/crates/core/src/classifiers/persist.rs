//! Versioned text serialization of trained models.
//!
//! The format is line-oriented and self-describing: a version header, the
//! algorithm tag, the feature-set flag, the normalization ranges, then one
//! algorithm-specific parameter block. Floats are written in Rust's
//! shortest round-trip decimal form, so load(save(m)) reproduces
//! bit-identical parameters and therefore bit-identical predictions.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::featurizer::{FeatureSetConfig, Label};

use super::adaboost::{AdaBoostParams, Stump};
use super::knn::KnnParams;
use super::logistic::LogisticParams;
use super::naive_bayes::NbParams;
use super::svm::SvmParams;
use super::{Algorithm, FeatureRange, ModelParams, TrainedModel};

const MAGIC: &str = "domsift-model v1";

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("not a model file (expected header {MAGIC:?}, got {0:?})")]
    UnsupportedVersion(String),
    #[error("model file line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub fn to_string(model: &TrainedModel) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("algorithm: {}\n", model.algorithm.tag()));
    out.push_str(&format!(
        "include_entropy: {}\n",
        model.feature_set.include_entropy
    ));
    match &model.normalization {
        None => out.push_str("normalization: none\n"),
        Some(ranges) => {
            out.push_str(&format!("normalization: {}\n", ranges.len()));
            for r in ranges {
                out.push_str(&format!("{} {}\n", r.min, r.max));
            }
        }
    }
    out.push_str(&format!("params: {}\n", model.algorithm.tag()));
    match &model.params {
        ModelParams::Svm(p) => {
            out.push_str(&format!("weights: {}\n", join(&p.weights)));
            out.push_str(&format!("bias: {}\n", p.bias));
            out.push_str(&format!("support_count: {}\n", p.support_count));
            out.push_str(&format!("iterations: {}\n", p.iterations));
        }
        ModelParams::Knn(p) => {
            out.push_str(&format!("k: {}\n", p.k));
            out.push_str(&format!("instances: {}\n", p.instances.len()));
            for (row, label) in p.instances.iter().zip(&p.labels) {
                out.push_str(&format!("{} {}\n", join(row), label.as_u8()));
            }
        }
        ModelParams::NaiveBayes(p) => {
            out.push_str(&format!("priors: {} {}\n", p.priors[0], p.priors[1]));
            out.push_str(&format!("means0: {}\n", join(&p.means[0])));
            out.push_str(&format!("means1: {}\n", join(&p.means[1])));
            out.push_str(&format!("variances0: {}\n", join(&p.variances[0])));
            out.push_str(&format!("variances1: {}\n", join(&p.variances[1])));
        }
        ModelParams::Logistic(p) => {
            out.push_str(&format!("weights: {}\n", join(&p.weights)));
            out.push_str(&format!("bias: {}\n", p.bias));
            out.push_str(&format!("converged: {}\n", p.converged));
            out.push_str(&format!("iterations: {}\n", p.iterations));
        }
        ModelParams::AdaBoost(p) => {
            out.push_str(&format!("stages: {}\n", p.stumps.len()));
            for (stump, stage) in p.stumps.iter().zip(&p.stage_weights) {
                out.push_str(&format!(
                    "{} {} {} {}\n",
                    stump.feature, stump.threshold, stump.polarity, stage
                ));
            }
        }
    }
    out.push_str("end\n");
    out
}

pub fn save(model: &TrainedModel, path: &Path) -> Result<(), ModelIoError> {
    fs::write(path, to_string(model)).map_err(|source| ModelIoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load(path: &Path) -> Result<TrainedModel, ModelIoError> {
    let content = fs::read_to_string(path).map_err(|source| ModelIoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_str(&content)
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

struct Reader<'a> {
    lines: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> Reader<'a> {
    fn next(&mut self) -> Result<&'a str, ModelIoError> {
        self.line_no += 1;
        self.lines.next().ok_or(ModelIoError::Parse {
            line: self.line_no,
            message: "unexpected end of file".into(),
        })
    }

    fn err(&self, message: String) -> ModelIoError {
        ModelIoError::Parse {
            line: self.line_no,
            message,
        }
    }

    /// Next line, which must be `key: value`; returns the value.
    fn kv(&mut self, key: &str) -> Result<&'a str, ModelIoError> {
        let line = self.next()?;
        let (k, v) = line
            .split_once(':')
            .ok_or_else(|| self.err(format!("expected '{key}: ...', got {line:?}")))?;
        if k != key {
            return Err(self.err(format!("expected key {key:?}, got {k:?}")));
        }
        Ok(v.trim())
    }

    fn f64_field(&self, raw: &str) -> Result<f64, ModelIoError> {
        raw.parse()
            .map_err(|_| self.err(format!("invalid float {raw:?}")))
    }

    fn f64_list(&self, raw: &str) -> Result<Vec<f64>, ModelIoError> {
        raw.split_whitespace().map(|v| self.f64_field(v)).collect()
    }

    fn usize_field(&self, raw: &str) -> Result<usize, ModelIoError> {
        raw.parse()
            .map_err(|_| self.err(format!("invalid count {raw:?}")))
    }

    fn kv_f64(&mut self, key: &str) -> Result<f64, ModelIoError> {
        let raw = self.kv(key)?;
        self.f64_field(raw)
    }

    fn kv_f64_list(&mut self, key: &str) -> Result<Vec<f64>, ModelIoError> {
        let raw = self.kv(key)?;
        self.f64_list(raw)
    }

    fn kv_usize(&mut self, key: &str) -> Result<usize, ModelIoError> {
        let raw = self.kv(key)?;
        self.usize_field(raw)
    }

    fn kv_bool(&mut self, key: &str) -> Result<bool, ModelIoError> {
        let raw = self.kv(key)?;
        raw.parse()
            .map_err(|_| self.err(format!("invalid flag {raw:?}")))
    }

    fn next_f64_list(&mut self) -> Result<Vec<f64>, ModelIoError> {
        let raw = self.next()?;
        self.f64_list(raw)
    }
}

pub fn from_str(content: &str) -> Result<TrainedModel, ModelIoError> {
    let mut r = Reader {
        lines: content.lines(),
        line_no: 0,
    };
    let header = r.next()?;
    if header != MAGIC {
        return Err(ModelIoError::UnsupportedVersion(header.to_string()));
    }
    let tag = r.kv("algorithm")?.to_string();
    let algorithm = Algorithm::from_tag(&tag)
        .ok_or_else(|| r.err(format!("unknown algorithm {tag:?}")))?;
    let include_entropy = r.kv_bool("include_entropy")?;
    let feature_set = FeatureSetConfig { include_entropy };

    let norm_raw = r.kv("normalization")?;
    let normalization = if norm_raw == "none" {
        None
    } else {
        let count = r.usize_field(norm_raw)?;
        let mut ranges = Vec::with_capacity(count);
        for _ in 0..count {
            let parts = r.next_f64_list()?;
            if parts.len() != 2 {
                return Err(r.err("expected '<min> <max>'".into()));
            }
            ranges.push(FeatureRange {
                min: parts[0],
                max: parts[1],
            });
        }
        Some(ranges)
    };

    let params_tag = r.kv("params")?;
    if params_tag != algorithm.tag() {
        return Err(r.err(format!(
            "params block {params_tag:?} does not match algorithm {:?}",
            algorithm.tag()
        )));
    }

    let params = match algorithm {
        Algorithm::Svm => {
            let weights = r.kv_f64_list("weights")?;
            let bias = r.kv_f64("bias")?;
            let support_count = r.kv_usize("support_count")?;
            let iterations = r.kv_usize("iterations")?;
            ModelParams::Svm(SvmParams {
                weights,
                bias,
                support_count,
                iterations,
            })
        }
        Algorithm::Knn => {
            let k = r.kv_usize("k")?;
            let count = r.kv_usize("instances")?;
            let mut instances = Vec::with_capacity(count);
            let mut labels = Vec::with_capacity(count);
            for _ in 0..count {
                let mut values = r.next_f64_list()?;
                let label_raw = values.pop().ok_or_else(|| r.err("empty instance".into()))?;
                let label = Label::from_u8(label_raw as u8)
                    .filter(|_| label_raw == 0.0 || label_raw == 1.0)
                    .ok_or_else(|| r.err(format!("invalid label {label_raw}")))?;
                instances.push(values);
                labels.push(label);
            }
            ModelParams::Knn(KnnParams {
                k,
                instances,
                labels,
            })
        }
        Algorithm::NaiveBayes => {
            let priors = r.kv_f64_list("priors")?;
            if priors.len() != 2 {
                return Err(r.err("expected two priors".into()));
            }
            let means0 = r.kv_f64_list("means0")?;
            let means1 = r.kv_f64_list("means1")?;
            let variances0 = r.kv_f64_list("variances0")?;
            let variances1 = r.kv_f64_list("variances1")?;
            ModelParams::NaiveBayes(NbParams {
                priors: [priors[0], priors[1]],
                means: [means0, means1],
                variances: [variances0, variances1],
            })
        }
        Algorithm::Logistic => {
            let weights = r.kv_f64_list("weights")?;
            let bias = r.kv_f64("bias")?;
            let converged = r.kv_bool("converged")?;
            let iterations = r.kv_usize("iterations")?;
            ModelParams::Logistic(LogisticParams {
                weights,
                bias,
                converged,
                iterations,
            })
        }
        Algorithm::AdaBoost => {
            let count = r.kv_usize("stages")?;
            let mut stumps = Vec::with_capacity(count);
            let mut stage_weights = Vec::with_capacity(count);
            for _ in 0..count {
                let parts = r.next_f64_list()?;
                if parts.len() != 4 {
                    return Err(r.err("expected '<feature> <threshold> <polarity> <stage>'".into()));
                }
                stumps.push(Stump {
                    feature: parts[0] as usize,
                    threshold: parts[1],
                    polarity: if parts[2] >= 0.0 { 1 } else { -1 },
                });
                stage_weights.push(parts[3]);
            }
            ModelParams::AdaBoost(AdaBoostParams {
                stumps,
                stage_weights,
            })
        }
    };

    let end = r.next()?;
    if end != "end" {
        return Err(r.err(format!("expected trailing 'end', got {end:?}")));
    }

    Ok(TrainedModel {
        algorithm,
        feature_set,
        normalization,
        params,
    })
}
