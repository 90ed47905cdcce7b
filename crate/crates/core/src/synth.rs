//! Synthetic labeled datasets with controllable class structure, used by
//! the evaluation harness and tests.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::featurizer::{FeatureVector, Label};
use crate::ingestion::{DatasetRow, DatasetSource, LabeledDataset, Provenance};
use crate::normalizer::NormalizedDomain;
use crate::seeding::substream_rng;

fn synthetic_domain(name: &str) -> NormalizedDomain {
    NormalizedDomain {
        original: format!("{name}.test"),
        name: name.to_string(),
        tld: "test".to_string(),
        sld: None,
        dropped_subdomains: Vec::new(),
        flags: Vec::new(),
    }
}

fn row(name: &str, features: FeatureVector, label: Label) -> DatasetRow {
    let mut features = features;
    features.label = Some(label);
    DatasetRow {
        domain: synthetic_domain(name),
        features,
        label,
        source: DatasetSource::Feed,
    }
}

/// Standard normal draw via Box-Muller.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let mut u1: f64 = rng.gen();
    while u1 <= f64::MIN_POSITIVE {
        u1 = rng.gen();
    }
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

struct BlobCenter {
    length: f64,
    hyphens: f64,
    digits: f64,
    entropy: f64,
}

fn blob_features(rng: &mut ChaCha8Rng, center: &BlobCenter) -> FeatureVector {
    let length = (center.length + gaussian(rng)).round().clamp(3.0, 60.0) as usize;
    let count = |mean: f64, rng: &mut ChaCha8Rng| {
        (mean + 0.4 * gaussian(rng)).round().max(0.0) as usize
    };
    let hyphens = count(center.hyphens, rng).min(length);
    let digits = count(center.digits, rng).min(length);
    let max_entropy = (length as f64).log2();
    let entropy = (center.entropy + 0.15 * gaussian(rng)).clamp(0.0, max_entropy);
    FeatureVector {
        length,
        hyphens,
        digits,
        entropy,
        label: None,
    }
}

/// Two well-separated Gaussian blobs in feature space, `per_class` rows
/// each: short low-entropy benign names against long, hyphen- and
/// digit-heavy, high-entropy malicious ones. The class centroids sit many
/// standard deviations apart on every feature.
pub fn two_blob_dataset(per_class: usize, seed: u64) -> LabeledDataset {
    let benign_center = BlobCenter {
        length: 10.0,
        hyphens: 0.5,
        digits: 0.5,
        entropy: 2.5,
    };
    let malicious_center = BlobCenter {
        length: 30.0,
        hyphens: 4.0,
        digits: 5.0,
        entropy: 4.2,
    };

    let mut rows = Vec::with_capacity(per_class * 2);
    let mut rng = substream_rng(seed, "synth/benign");
    for i in 0..per_class {
        rows.push(row(
            &format!("syn-b-{i:05}"),
            blob_features(&mut rng, &benign_center),
            Label::Benign,
        ));
    }
    let mut rng = substream_rng(seed, "synth/malicious");
    for i in 0..per_class {
        rows.push(row(
            &format!("syn-m-{i:05}"),
            blob_features(&mut rng, &malicious_center),
            Label::Malicious,
        ));
    }
    LabeledDataset::new(rows, Provenance::synthetic("two-blob", seed))
        .expect("synthetic rows are unique")
}

/// A labeled dataset with the given class counts and unremarkable features,
/// for protocol-level tests (folding, balancing) where feature geometry is
/// irrelevant. Benign rows come first.
pub fn labeled_rows_dataset(benign: usize, malicious: usize, seed: u64) -> LabeledDataset {
    let mut rows = Vec::with_capacity(benign + malicious);
    for i in 0..benign {
        rows.push(row(
            &format!("ben-{i:06}"),
            FeatureVector {
                length: 10 + i % 5,
                hyphens: 1,
                digits: i % 3,
                entropy: 2.0 + (i % 7) as f64 * 0.1,
                label: None,
            },
            Label::Benign,
        ));
    }
    for i in 0..malicious {
        rows.push(row(
            &format!("mal-{i:06}"),
            FeatureVector {
                length: 14 + i % 5,
                hyphens: 2,
                digits: i % 4,
                entropy: 3.0 + (i % 7) as f64 * 0.1,
                label: None,
            },
            Label::Malicious,
        ));
    }
    LabeledDataset::new(rows, Provenance::synthetic("labeled-rows", seed))
        .expect("synthetic rows are unique")
}

/// Every row carries identical features; the malicious block comes first.
/// Degenerate by construction: distance-based models resolve ties toward
/// the first training row.
pub fn constant_feature_dataset(malicious: usize, benign: usize, seed: u64) -> LabeledDataset {
    let features = FeatureVector {
        length: 12,
        hyphens: 1,
        digits: 2,
        entropy: 2.75,
        label: None,
    };
    let mut rows = Vec::with_capacity(malicious + benign);
    for i in 0..malicious {
        rows.push(row(
            &format!("const-m-{i:05}"),
            features.clone(),
            Label::Malicious,
        ));
    }
    for i in 0..benign {
        rows.push(row(
            &format!("const-b-{i:05}"),
            features.clone(),
            Label::Benign,
        ));
    }
    LabeledDataset::new(rows, Provenance::synthetic("constant-feature", seed))
        .expect("synthetic rows are unique")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_are_reproducible_and_balanced() {
        let a = two_blob_dataset(100, 42);
        let b = two_blob_dataset(100, 42);
        assert_eq!(a, b);
        assert_eq!(a.class_counts(), (100, 100));
        let c = two_blob_dataset(100, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn blob_classes_are_separable_by_nearest_centroid() {
        let ds = two_blob_dataset(200, 7);
        let fs = crate::featurizer::FeatureSetConfig::with_entropy();
        let mut centroids = [[0.0f64; 4]; 2];
        let mut counts = [0usize; 2];
        for row in ds.rows() {
            let c = row.label.as_u8() as usize;
            for (j, v) in row.features.numeric(fs).iter().enumerate() {
                centroids[c][j] += v;
            }
            counts[c] += 1;
        }
        for (centroid, count) in centroids.iter_mut().zip(counts) {
            for v in centroid.iter_mut() {
                *v /= count as f64;
            }
        }
        for row in ds.rows() {
            let x = row.features.numeric(fs);
            let dist = |c: &[f64; 4]| -> f64 {
                c.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum()
            };
            let nearest = if dist(&centroids[0]) <= dist(&centroids[1]) {
                Label::Benign
            } else {
                Label::Malicious
            };
            assert_eq!(nearest, row.label, "blob overlap at {:?}", row.features);
        }
    }

    #[test]
    fn feature_invariants_hold() {
        let ds = two_blob_dataset(300, 123);
        for row in ds.rows() {
            let f = &row.features;
            assert!(f.length >= 1);
            assert!(f.hyphens <= f.length);
            assert!(f.digits <= f.length);
            assert!(f.entropy >= 0.0);
            assert!(f.entropy <= (f.length as f64).log2() + 1e-12);
        }
    }
}
