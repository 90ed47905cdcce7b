//! Lexical features of a normalized domain name: length, hyphen count,
//! digit count, and Shannon entropy, plus per-class feature statistics.
//!
//! All four features are computed over the registrable name only; the TLD
//! and SLD never enter any calculation.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::normalizer::NormalizedDomain;

/// Binary class of a domain: 1 = malicious, 0 = benign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Benign,
    Malicious,
}

impl Label {
    pub fn from_u8(v: u8) -> Option<Label> {
        match v {
            0 => Some(Label::Benign),
            1 => Some(Label::Malicious),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Label::Benign => 0,
            Label::Malicious => 1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.as_u8() as f64
    }

    pub fn is_malicious(self) -> bool {
        self == Label::Malicious
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Benign => write!(f, "benign"),
            Label::Malicious => write!(f, "malicious"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("entropy of the empty string is undefined")]
    EmptyString,
    #[error("dataset has no {0} rows")]
    MissingClass(Label),
}

/// Lexical feature vector of one domain name.
///
/// `length`, `hyphens`, and `digits` count characters of the registrable
/// name; `entropy` is the base-2 Shannon entropy of its character
/// distribution. The optional label is the supervised target and is never
/// used as a model input.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub length: usize,
    pub hyphens: usize,
    pub digits: usize,
    pub entropy: f64,
    pub label: Option<Label>,
}

impl FeatureVector {
    /// Numeric model inputs under the given feature-set configuration.
    /// Counts are widened to f64 so one dataset schema serves all
    /// classifiers.
    pub fn numeric(&self, fs: FeatureSetConfig) -> Vec<f64> {
        let mut v = vec![self.length as f64, self.hyphens as f64, self.digits as f64];
        if fs.include_entropy {
            v.push(self.entropy);
        }
        v
    }
}

/// Whether models consume the entropy feature (4 inputs) or not (3).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureSetConfig {
    pub include_entropy: bool,
}

impl FeatureSetConfig {
    pub fn with_entropy() -> Self {
        FeatureSetConfig {
            include_entropy: true,
        }
    }

    pub fn without_entropy() -> Self {
        FeatureSetConfig {
            include_entropy: false,
        }
    }

    pub fn dimensionality(self) -> usize {
        if self.include_entropy {
            4
        } else {
            3
        }
    }
}

impl Default for FeatureSetConfig {
    fn default() -> Self {
        FeatureSetConfig::with_entropy()
    }
}

/// Base-2 Shannon entropy of a string's character distribution:
/// -sum over distinct characters c of p(c) * log2 p(c), with
/// p(c) = count(c) / len(s). Result lies in [0, log2(len(s))].
pub fn shannon_entropy(s: &str) -> Result<f64, FeatureError> {
    if s.is_empty() {
        return Err(FeatureError::EmptyString);
    }
    // BTreeMap keeps the summation order independent of insertion order,
    // so permutations of s produce bit-identical results.
    let mut counts: BTreeMap<char, usize> = BTreeMap::new();
    let mut total = 0usize;
    for c in s.chars() {
        *counts.entry(c).or_insert(0) += 1;
        total += 1;
    }
    let n = total as f64;
    let mut h = 0.0;
    for &count in counts.values() {
        let p = count as f64 / n;
        h -= p * p.log2();
    }
    // a single-symbol string sums to -0.0
    Ok(if h == 0.0 { 0.0 } else { h })
}

/// Extract the lexical features of a normalized domain. All counts and the
/// entropy are computed over the registrable name only.
pub fn extract_features(
    domain: &NormalizedDomain,
    label: Option<Label>,
) -> Result<FeatureVector, FeatureError> {
    let name = &domain.name;
    let entropy = shannon_entropy(name)?;
    Ok(FeatureVector {
        length: name.chars().count(),
        hyphens: name.chars().filter(|&c| c == '-').count(),
        digits: name.chars().filter(char::is_ascii_digit).count(),
        entropy,
        label,
    })
}

/// Arithmetic means of the four numeric features for one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureMeans {
    pub length: f64,
    pub hyphens: f64,
    pub digits: f64,
    pub entropy: f64,
}

/// Per-class feature means and row counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassStats {
    pub benign: FeatureMeans,
    pub malicious: FeatureMeans,
    pub benign_count: usize,
    pub malicious_count: usize,
}

impl ClassStats {
    /// Render as the two-class comparison table with rows Host length,
    /// Hyphens, Numeric Characters, Entropy. The header line is emitted
    /// verbatim; data rows pad the feature column.
    pub fn to_table(&self) -> String {
        let rows = [
            ("Host length", self.benign.length, self.malicious.length),
            ("Hyphens", self.benign.hyphens, self.malicious.hyphens),
            ("Numeric Characters", self.benign.digits, self.malicious.digits),
            ("Entropy", self.benign.entropy, self.malicious.entropy),
        ];
        let width = rows
            .iter()
            .map(|(name, _, _)| name.len())
            .max()
            .unwrap_or(0);
        let mut out = String::from("Feature | Legitimate links | Malicious links\n");
        for (name, benign, malicious) in rows {
            out.push_str(&format!("{name:<width$} | {benign:.3} | {malicious:.3}\n"));
        }
        out
    }
}

/// Per-class arithmetic means over all rows of a labeled dataset.
///
/// Fails when either class is absent, naming the missing class.
pub fn dataset_stats(ds: &crate::ingestion::LabeledDataset) -> Result<ClassStats, FeatureError> {
    let mut sums = [[0.0f64; 4]; 2];
    let mut counts = [0usize; 2];
    for row in ds.rows() {
        let class = row.label.as_u8() as usize;
        let f = &row.features;
        sums[class][0] += f.length as f64;
        sums[class][1] += f.hyphens as f64;
        sums[class][2] += f.digits as f64;
        sums[class][3] += f.entropy;
        counts[class] += 1;
    }
    if counts[0] == 0 {
        return Err(FeatureError::MissingClass(Label::Benign));
    }
    if counts[1] == 0 {
        return Err(FeatureError::MissingClass(Label::Malicious));
    }
    let means = |class: usize| FeatureMeans {
        length: sums[class][0] / counts[class] as f64,
        hyphens: sums[class][1] / counts[class] as f64,
        digits: sums[class][2] / counts[class] as f64,
        entropy: sums[class][3] / counts[class] as f64,
    };
    Ok(ClassStats {
        benign: means(0),
        malicious: means(1),
        benign_count: counts[0],
        malicious_count: counts[1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalizer::normalize;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent entropy oracle: builds the histogram by repeated scans
    /// over the sorted distinct characters instead of a counting map, and
    /// sums in that order. Shares no code with the production path.
    pub(crate) fn entropy_oracle(s: &str) -> f64 {
        assert!(!s.is_empty());
        let chars: Vec<char> = s.chars().collect();
        let mut distinct: Vec<char> = chars.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let n = chars.len() as f64;
        let mut h = 0.0;
        for d in distinct {
            let count = chars.iter().filter(|&&c| c == d).count() as f64;
            let p = count / n;
            h += p * (1.0 / p).log2();
        }
        h
    }

    #[test]
    fn entropy_trivial_values() {
        assert_eq!(shannon_entropy("aaaa").unwrap(), 0.0);
        assert_eq!(shannon_entropy("ab").unwrap(), 1.0);
        assert_eq!(shannon_entropy("a").unwrap(), 0.0);
        assert_eq!(shannon_entropy("abcd").unwrap(), 2.0);
    }

    #[test]
    fn entropy_of_empty_string_is_an_error() {
        assert_eq!(shannon_entropy(""), Err(FeatureError::EmptyString));
    }

    #[test]
    fn entropy_matches_summation_oracle() {
        // character counts of "covid19-guidelines": i*3, d*2, e*2 and
        // eleven singletons over 18 characters
        let h = shannon_entropy("covid19-guidelines").unwrap();
        assert!((h - entropy_oracle("covid19-guidelines")).abs() < 1e-9);
        assert!((h - 3.6835423624332306).abs() < 1e-9);

        let h = shannon_entropy("example-website").unwrap();
        assert!((h - entropy_oracle("example-website")).abs() < 1e-9);
        assert!((h - 3.373557262275185).abs() < 1e-9);
    }

    #[test]
    fn entropy_agrees_with_oracle_on_random_strings() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let alphabet: Vec<char> = ('a'..='z').chain('0'..='9').chain(['-']).collect();
        for _ in 0..1000 {
            let len = rng.gen_range(1..=64);
            let s: String = (0..len)
                .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
                .collect();
            let h = shannon_entropy(&s).unwrap();
            assert!(
                (h - entropy_oracle(&s)).abs() < 1e-9,
                "disagreement on {s:?}"
            );
        }
    }

    proptest! {
        #[test]
        fn entropy_is_permutation_invariant(s in "[a-z0-9-]{1,32}", seed in any::<u64>()) {
            let mut chars: Vec<char> = s.chars().collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..chars.len()).rev() {
                chars.swap(i, rng.gen_range(0..=i));
            }
            let shuffled: String = chars.into_iter().collect();
            // identical histograms and summation order means bit equality
            prop_assert_eq!(
                shannon_entropy(&s).unwrap().to_bits(),
                shannon_entropy(&shuffled).unwrap().to_bits()
            );
        }

        #[test]
        fn entropy_is_bounded_and_maximal_iff_distinct(s in "[a-z0-9-]{1,20}") {
            let h = shannon_entropy(&s).unwrap();
            let n = s.chars().count();
            let max = (n as f64).log2();
            prop_assert!(h >= 0.0);
            prop_assert!(h <= max + 1e-12);
            let mut distinct: Vec<char> = s.chars().collect();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() == n {
                prop_assert!((h - max).abs() < 1e-9);
            } else {
                prop_assert!(h < max - 1e-9);
            }
        }

        #[test]
        fn counts_partition_registration_alphabet(s in "[a-z0-9-]{1,32}") {
            let domain = normalize(&format!("{s}.com"), false).unwrap();
            let fv = extract_features(&domain, None).unwrap();
            let alpha = domain.name.chars().filter(char::is_ascii_alphabetic).count();
            prop_assert_eq!(fv.length, fv.hyphens + fv.digits + alpha);
        }
    }

    #[test]
    fn extract_features_known_domains() {
        let d = normalize("example-website.com", false).unwrap();
        let fv = extract_features(&d, None).unwrap();
        assert_eq!(fv.length, 15);
        assert_eq!(fv.hyphens, 1);
        assert_eq!(fv.digits, 0);
        assert!((fv.entropy - 3.373557262275185).abs() < 1e-9);
        assert_eq!(fv.label, None);

        let d = normalize("covid19-guidelines.com", false).unwrap();
        let fv = extract_features(&d, Some(Label::Malicious)).unwrap();
        assert_eq!(fv.length, 18);
        assert_eq!(fv.hyphens, 1);
        assert_eq!(fv.digits, 2);
        assert!((fv.entropy - 3.6835423624332306).abs() < 1e-9);
        assert_eq!(fv.label, Some(Label::Malicious));

        let d = normalize("a.com", false).unwrap();
        let fv = extract_features(&d, None).unwrap();
        assert_eq!(
            (fv.length, fv.hyphens, fv.digits),
            (1, 0, 0)
        );
        assert_eq!(fv.entropy, 0.0);
    }

    #[test]
    fn numeric_fields_are_label_independent() {
        let d = normalize("covid19-guidelines.com", false).unwrap();
        let a = extract_features(&d, None).unwrap();
        let b = extract_features(&d, Some(Label::Benign)).unwrap();
        let c = extract_features(&d, Some(Label::Malicious)).unwrap();
        for fs in [FeatureSetConfig::with_entropy(), FeatureSetConfig::without_entropy()] {
            assert_eq!(a.numeric(fs), b.numeric(fs));
            assert_eq!(a.numeric(fs), c.numeric(fs));
        }
    }

    #[test]
    fn feature_set_dimensionality() {
        assert_eq!(FeatureSetConfig::with_entropy().dimensionality(), 4);
        assert_eq!(FeatureSetConfig::without_entropy().dimensionality(), 3);
        let d = normalize("ab1-c.net", false).unwrap();
        let fv = extract_features(&d, None).unwrap();
        assert_eq!(fv.numeric(FeatureSetConfig::with_entropy()).len(), 4);
        assert_eq!(fv.numeric(FeatureSetConfig::without_entropy()).len(), 3);
    }

    #[test]
    fn dataset_stats_match_hand_averages() {
        use crate::ingestion::{DatasetRow, DatasetSource, LabeledDataset, Provenance};

        let mut rows = Vec::new();
        for (name, label) in [
            ("ab-1.com", Label::Benign),      // length 4, hyphens 1, digits 1
            ("abcdef.com", Label::Benign),    // length 6, hyphens 0, digits 0
            ("a-b-c12.com", Label::Malicious), // length 7, hyphens 2, digits 2
            ("xy9.com", Label::Malicious),    // length 3, hyphens 0, digits 1
        ] {
            let domain = normalize(name, false).unwrap();
            rows.push(DatasetRow::from_domain(&domain, label, DatasetSource::Feed).unwrap());
        }
        let entropy = |i: usize| rows[i].features.entropy;
        let expected_benign_entropy = (entropy(0) + entropy(1)) / 2.0;
        let expected_malicious_entropy = (entropy(2) + entropy(3)) / 2.0;
        let ds = LabeledDataset::new(rows, Provenance::synthetic("stats", 0)).unwrap();

        let stats = dataset_stats(&ds).unwrap();
        assert_eq!(stats.benign_count, 2);
        assert_eq!(stats.malicious_count, 2);
        assert_eq!(stats.benign.length, 5.0);
        assert_eq!(stats.benign.hyphens, 0.5);
        assert_eq!(stats.benign.digits, 0.5);
        assert_eq!(stats.benign.entropy, expected_benign_entropy);
        assert_eq!(stats.malicious.length, 5.0);
        assert_eq!(stats.malicious.hyphens, 1.0);
        assert_eq!(stats.malicious.digits, 1.5);
        assert_eq!(stats.malicious.entropy, expected_malicious_entropy);
    }

    #[test]
    fn dataset_of_identical_rows_averages_to_itself() {
        use crate::ingestion::{DatasetRow, DatasetSource, LabeledDataset, Provenance};

        // same features on every row (distinct names with equal counts)
        let rows: Vec<DatasetRow> = ["aab.com", "abb.com", "baa.com", "bba.com"]
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let label = if i % 2 == 0 { Label::Benign } else { Label::Malicious };
                let domain = normalize(name, false).unwrap();
                DatasetRow::from_domain(&domain, label, DatasetSource::Feed).unwrap()
            })
            .collect();
        let reference = rows[0].features.clone();
        let ds = LabeledDataset::new(rows, Provenance::synthetic("identical", 0)).unwrap();
        let stats = dataset_stats(&ds).unwrap();
        for means in [stats.benign, stats.malicious] {
            assert_eq!(means.length, reference.length as f64);
            assert_eq!(means.hyphens, reference.hyphens as f64);
            assert_eq!(means.digits, reference.digits as f64);
            assert_eq!(means.entropy, reference.entropy);
        }
    }

    #[test]
    fn missing_class_is_named_in_the_error() {
        use crate::ingestion::{DatasetRow, DatasetSource, LabeledDataset, Provenance};

        let domain = normalize("only-benign.com", false).unwrap();
        let row = DatasetRow::from_domain(&domain, Label::Benign, DatasetSource::Feed).unwrap();
        let ds = LabeledDataset::new(vec![row], Provenance::synthetic("one-class", 0)).unwrap();
        assert_eq!(
            dataset_stats(&ds).unwrap_err(),
            FeatureError::MissingClass(Label::Malicious)
        );
        let empty = LabeledDataset::new(vec![], Provenance::synthetic("empty", 0)).unwrap();
        assert_eq!(
            dataset_stats(&empty).unwrap_err(),
            FeatureError::MissingClass(Label::Benign)
        );
    }

    #[test]
    fn stats_table_header_and_rows() {
        let stats = ClassStats {
            benign: FeatureMeans {
                length: 14.851,
                hyphens: 0.19,
                digits: 0.455,
                entropy: 3.262,
            },
            malicious: FeatureMeans {
                length: 16.024,
                hyphens: 0.2,
                digits: 0.647,
                entropy: 3.342,
            },
            benign_count: 2,
            malicious_count: 2,
        };
        let table = stats.to_table();
        let mut lines = table.lines();
        assert_eq!(
            lines.next().unwrap(),
            "Feature | Legitimate links | Malicious links"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 4);
        assert!(rows[0].starts_with("Host length"));
        assert!(rows[1].starts_with("Hyphens"));
        assert!(rows[2].starts_with("Numeric Characters"));
        assert!(rows[3].starts_with("Entropy"));
        assert!(rows[0].contains("14.851") && rows[0].contains("16.024"));
    }
}
