//! Feed and threat-list ingestion: read newly-registered-domain feeds,
//! filter for campaign keywords, label by cross-matching against a
//! risk-rated threat list, balance classes, and persist datasets.
//!
//! Labeling ground truth: a feed domain whose normalized registrable form
//! appears in the threat-positive set is malicious; everything else in the
//! feed is assumed benign. That assumption is weak, so datasets carry full
//! provenance (input fingerprints, keyword-set hash, seed).

mod dataset_file;

pub use dataset_file::{read_dataset, write_dataset};

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use thiserror::Error;

use crate::featurizer::{extract_features, FeatureError, FeatureVector, Label};
use crate::normalizer::{match_keywords, normalize, KeywordSet, NormalizeError, NormalizedDomain};
use crate::seeding::{sha256_hex, substream_rng};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("threat threshold {0} outside [0,100]")]
    InvalidThreshold(u32),
    #[error("provenance field {0} is empty")]
    EmptyProvenance(&'static str),
    #[error("duplicate dataset row for {0}")]
    DuplicateRow(String),
    #[error("row label disagrees with its feature-vector label for {0}")]
    LabelMismatch(String),
    #[error("benign fraction {0} outside (0,1)")]
    InvalidFraction(f64),
    #[error("cannot balance a single-class dataset (only {0} rows present)")]
    SingleClass(Label),
    #[error("balance needs {needed} {label} rows, only {available} available")]
    Shortfall {
        label: Label,
        needed: usize,
        available: usize,
    },
    #[error("row {0:?} cannot be serialized (embedded separator or non-finite value)")]
    Unserializable(String),
    #[error("not a dataset file: expected header {expected:?}, got {got:?}")]
    SchemaVersion { expected: String, got: String },
    #[error("dataset checksum mismatch: header says {header}, content hashes to {actual}")]
    ChecksumMismatch { header: String, actual: String },
    #[error("dataset header is missing the {0:?} line")]
    MissingHeader(&'static str),
    #[error("dataset line {line}: {message}")]
    ParseRow { line: usize, message: String },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
}

/// One line of a newly-registered-domains feed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainFeedRecord {
    pub domain: String,
    pub observed_date: Option<NaiveDate>,
}

/// One threat-positive entry of a risk-rated threat list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreatListEntry {
    pub domain: String,
    /// Risk rating in [0, 100].
    pub risk_rating: u8,
}

/// A line that failed to parse, kept for diagnostics instead of being
/// silently dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedLine {
    pub line: usize,
    pub content: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedFormat {
    /// One hostname per line.
    PlainLines,
    /// `domain,observed_date` rows; the date is optional.
    Delimited,
}

impl FeedFormat {
    pub fn from_tag(tag: &str) -> Option<FeedFormat> {
        match tag {
            "plain" => Some(FeedFormat::PlainLines),
            "delimited" => Some(FeedFormat::Delimited),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            FeedFormat::PlainLines => "plain",
            FeedFormat::Delimited => "delimited",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedParse {
    pub records: Vec<DomainFeedRecord>,
    pub rejects: Vec<RejectedLine>,
}

fn read_to_string(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Content lines of a file: (1-based line number, trimmed content), with
/// blank lines and '#' comments skipped.
fn content_lines(content: &str) -> impl Iterator<Item = (usize, &str)> {
    content
        .lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
}

/// Read a domain feed. Every non-empty, non-comment line yields one record;
/// malformed lines are collected into the rejects list with line numbers.
pub fn read_feed(path: &Path, format: FeedFormat) -> Result<FeedParse, IngestError> {
    let content = read_to_string(path)?;
    let mut records = Vec::new();
    let mut rejects = Vec::new();
    let mut first_content_line = true;
    for (line_no, line) in content_lines(&content) {
        match format {
            FeedFormat::PlainLines => {
                records.push(DomainFeedRecord {
                    domain: line.to_string(),
                    observed_date: None,
                });
            }
            FeedFormat::Delimited => {
                if first_content_line && line == "domain,observed_date" {
                    first_content_line = false;
                    continue;
                }
                let mut parts = line.split(',');
                let domain = parts.next().unwrap_or("").trim().to_string();
                let date_raw = parts.next().map(str::trim);
                if parts.next().is_some() {
                    rejects.push(RejectedLine {
                        line: line_no,
                        content: line.to_string(),
                        reason: "more than two fields".into(),
                    });
                    first_content_line = false;
                    continue;
                }
                if domain.is_empty() {
                    rejects.push(RejectedLine {
                        line: line_no,
                        content: line.to_string(),
                        reason: "empty domain".into(),
                    });
                    first_content_line = false;
                    continue;
                }
                let observed_date = match date_raw {
                    None | Some("") => None,
                    Some(raw) => match NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
                        Ok(date) => Some(date),
                        Err(_) => {
                            rejects.push(RejectedLine {
                                line: line_no,
                                content: line.to_string(),
                                reason: format!("invalid date {raw:?} (expected YYYY-MM-DD)"),
                            });
                            first_content_line = false;
                            continue;
                        }
                    },
                };
                records.push(DomainFeedRecord {
                    domain,
                    observed_date,
                });
            }
        }
        first_content_line = false;
    }
    Ok(FeedParse { records, rejects })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreatParse {
    /// Entries at or above the threshold.
    pub positives: Vec<ThreatListEntry>,
    /// Entries parsed fine but below the threshold.
    pub below_threshold: usize,
    pub rejects: Vec<RejectedLine>,
}

/// Read a `domain,risk_rating` threat list (header optional), keeping the
/// entries rated at or above the threshold. Ratings outside [0,100] are
/// rejected lines; entries below the threshold are excluded but counted.
pub fn read_threat_list(path: &Path, threshold: u8) -> Result<ThreatParse, IngestError> {
    if threshold > 100 {
        return Err(IngestError::InvalidThreshold(threshold as u32));
    }
    let content = read_to_string(path)?;
    let mut positives = Vec::new();
    let mut below_threshold = 0usize;
    let mut rejects = Vec::new();
    let mut first_content_line = true;
    for (line_no, line) in content_lines(&content) {
        if first_content_line && line == "domain,risk_rating" {
            first_content_line = false;
            continue;
        }
        first_content_line = false;
        let mut reject = |reason: String| {
            rejects.push(RejectedLine {
                line: line_no,
                content: line.to_string(),
                reason,
            });
        };
        let Some((domain, rating_raw)) = line.split_once(',') else {
            reject("expected domain,risk_rating".into());
            continue;
        };
        let domain = domain.trim();
        let rating_raw = rating_raw.trim();
        if domain.is_empty() {
            reject("empty domain".into());
            continue;
        }
        let rating: u32 = match rating_raw.parse() {
            Ok(r) => r,
            Err(_) => {
                reject(format!("invalid risk rating {rating_raw:?}"));
                continue;
            }
        };
        if rating > 100 {
            reject(format!("risk rating {rating} outside [0,100]"));
            continue;
        }
        if rating < threshold as u32 {
            below_threshold += 1;
            continue;
        }
        positives.push(ThreatListEntry {
            domain: domain.to_string(),
            risk_rating: rating as u8,
        });
    }
    Ok(ThreatParse {
        positives,
        below_threshold,
        rejects,
    })
}

/// Result of the campaign keyword filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CampaignFilter {
    pub kept: Vec<DomainFeedRecord>,
    pub total: usize,
    /// Records whose domain failed normalization and so could not match.
    pub unparseable: usize,
}

impl CampaignFilter {
    pub fn kept_count(&self) -> usize {
        self.kept.len()
    }
}

/// Keep the records whose normalized registrable name contains any expanded
/// keyword variant.
pub fn filter_campaign(records: &[DomainFeedRecord], ks: &KeywordSet) -> CampaignFilter {
    let total = records.len();
    let mut kept = Vec::new();
    let mut unparseable = 0usize;
    for record in records {
        match normalize(&record.domain, false) {
            Ok(domain) => {
                if !match_keywords(&domain, ks).is_empty() {
                    kept.push(record.clone());
                }
            }
            Err(_) => unparseable += 1,
        }
    }
    CampaignFilter {
        kept,
        total,
        unparseable,
    }
}

/// Where a dataset row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetSource {
    Feed,
    ThreatList,
}

impl DatasetSource {
    pub fn tag(self) -> &'static str {
        match self {
            DatasetSource::Feed => "feed",
            DatasetSource::ThreatList => "threat",
        }
    }

    pub fn from_tag(tag: &str) -> Option<DatasetSource> {
        match tag {
            "feed" => Some(DatasetSource::Feed),
            "threat" => Some(DatasetSource::ThreatList),
            _ => None,
        }
    }
}

/// One labeled dataset row. The domain is stored in canonical form (its
/// original is the registrable string) and the feature vector's label
/// mirrors the row label.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub domain: NormalizedDomain,
    pub features: FeatureVector,
    pub label: Label,
    pub source: DatasetSource,
}

impl DatasetRow {
    /// Build a row from a normalized domain, canonicalizing the domain and
    /// extracting features with the label attached.
    pub fn from_domain(
        domain: &NormalizedDomain,
        label: Label,
        source: DatasetSource,
    ) -> Result<DatasetRow, FeatureError> {
        let canonical = NormalizedDomain {
            original: domain.registrable(),
            name: domain.name.clone(),
            tld: domain.tld.clone(),
            sld: domain.sld.clone(),
            dropped_subdomains: Vec::new(),
            flags: domain.flags.clone(),
        };
        let features = extract_features(&canonical, Some(label))?;
        Ok(DatasetRow {
            domain: canonical,
            features,
            label,
            source,
        })
    }

    pub fn key(&self) -> String {
        self.domain.registrable()
    }
}

/// How a dataset was balanced, recorded in provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceInfo {
    pub benign_fraction: f64,
    pub benign_rows: usize,
    pub malicious_rows: usize,
    pub note: String,
}

/// Where a dataset came from: input fingerprints, the keyword set that
/// filtered it, and the master seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub version: u32,
    pub feed_fingerprint: String,
    pub threat_fingerprint: String,
    pub keyword_hash: String,
    pub seed: u64,
    pub balance: Option<BalanceInfo>,
}

impl Provenance {
    /// Provenance for generated datasets; fingerprints derive from the
    /// generator description.
    pub fn synthetic(description: &str, seed: u64) -> Provenance {
        Provenance {
            version: 1,
            feed_fingerprint: sha256_hex(format!("synthetic-feed:{description}").as_bytes()),
            threat_fingerprint: sha256_hex(format!("synthetic-threat:{description}").as_bytes()),
            keyword_hash: sha256_hex(format!("synthetic-keywords:{description}").as_bytes()),
            seed,
            balance: None,
        }
    }

    fn validate(&self) -> Result<(), IngestError> {
        if self.feed_fingerprint.is_empty() {
            return Err(IngestError::EmptyProvenance("feed_fingerprint"));
        }
        if self.threat_fingerprint.is_empty() {
            return Err(IngestError::EmptyProvenance("threat_fingerprint"));
        }
        if self.keyword_hash.is_empty() {
            return Err(IngestError::EmptyProvenance("keyword_hash"));
        }
        Ok(())
    }
}

/// An ordered, deduplicated collection of labeled rows with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    rows: Vec<DatasetRow>,
    provenance: Provenance,
}

impl LabeledDataset {
    /// Validates the dataset invariants: non-empty provenance fields, no
    /// duplicate registrable forms, and row/feature label agreement.
    pub fn new(rows: Vec<DatasetRow>, provenance: Provenance) -> Result<Self, IngestError> {
        provenance.validate()?;
        let mut seen = BTreeSet::new();
        for row in &rows {
            let key = row.key();
            if !seen.insert(key.clone()) {
                return Err(IngestError::DuplicateRow(key));
            }
            if row.features.label != Some(row.label) {
                return Err(IngestError::LabelMismatch(key));
            }
        }
        Ok(LabeledDataset { rows, provenance })
    }

    pub fn rows(&self) -> &[DatasetRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// (benign, malicious) row counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let malicious = self.rows.iter().filter(|r| r.label.is_malicious()).count();
        (self.rows.len() - malicious, malicious)
    }

    /// Content hash of the serialized rows; the same value guards the
    /// dataset file as its checksum.
    pub fn fingerprint(&self) -> String {
        sha256_hex(dataset_file::body_string(self).as_bytes())
    }
}

/// Label the filtered feed against the threat-positive set. Matching runs
/// on the normalized registrable form, so `WWW.Covid-Help.com` matches
/// `covid-help.com`. Duplicates keep their first occurrence. With
/// `augment` on, threat-positive domains absent from the feed are appended
/// as malicious rows.
pub fn label_by_matching(
    feed: &[DomainFeedRecord],
    threats: &[ThreatListEntry],
    ks: &KeywordSet,
    augment: bool,
    seed: u64,
) -> Result<LabeledDataset, IngestError> {
    let feed_fingerprint = sha256_hex(
        feed.iter()
            .map(|r| r.domain.as_str())
            .collect::<Vec<_>>()
            .join("\n")
            .as_bytes(),
    );
    let threat_fingerprint = sha256_hex(
        threats
            .iter()
            .map(|t| format!("{},{}", t.domain, t.risk_rating))
            .collect::<Vec<_>>()
            .join("\n")
            .as_bytes(),
    );

    let mut threat_keys = BTreeSet::new();
    let mut threat_domains = Vec::new();
    for entry in threats {
        if let Ok(domain) = normalize(&entry.domain, false) {
            let key = domain.registrable();
            if threat_keys.insert(key) {
                threat_domains.push(domain);
            }
        }
    }

    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for record in feed {
        let Ok(domain) = normalize(&record.domain, false) else {
            continue;
        };
        let key = domain.registrable();
        if !seen.insert(key.clone()) {
            continue;
        }
        let label = if threat_keys.contains(&key) {
            Label::Malicious
        } else {
            Label::Benign
        };
        rows.push(DatasetRow::from_domain(&domain, label, DatasetSource::Feed)?);
    }

    if augment {
        for domain in &threat_domains {
            let key = domain.registrable();
            if seen.insert(key) {
                rows.push(DatasetRow::from_domain(
                    domain,
                    Label::Malicious,
                    DatasetSource::ThreatList,
                )?);
            }
        }
    }

    LabeledDataset::new(
        rows,
        Provenance {
            version: 1,
            feed_fingerprint,
            threat_fingerprint,
            keyword_hash: ks.content_hash(),
            seed,
            balance: None,
        },
    )
}

/// Rebalance toward `benign_fraction` benign share: all rows of the
/// minority-target class are kept and the other class is sampled without
/// replacement (seeded), exact to rounding. Kept rows are unchanged and
/// stay in their original order.
pub fn balance(
    ds: &LabeledDataset,
    benign_fraction: f64,
    seed: u64,
) -> Result<LabeledDataset, IngestError> {
    if !(benign_fraction > 0.0 && benign_fraction < 1.0) {
        return Err(IngestError::InvalidFraction(benign_fraction));
    }
    let (benign, malicious) = ds.class_counts();
    if benign == 0 {
        return Err(IngestError::SingleClass(Label::Malicious));
    }
    if malicious == 0 {
        return Err(IngestError::SingleClass(Label::Benign));
    }

    // the class with the smaller target share is kept whole; at 0.5 the
    // smaller class is kept
    let keep_benign = if benign_fraction < 0.5 {
        true
    } else if benign_fraction > 0.5 {
        false
    } else {
        benign <= malicious
    };
    let (kept_label, kept_count, sampled_label, available, ratio) = if keep_benign {
        let ratio = (1.0 - benign_fraction) / benign_fraction;
        (Label::Benign, benign, Label::Malicious, malicious, ratio)
    } else {
        let ratio = benign_fraction / (1.0 - benign_fraction);
        (Label::Malicious, malicious, Label::Benign, benign, ratio)
    };
    let target = (kept_count as f64 * ratio).round() as usize;
    if target > available {
        return Err(IngestError::Shortfall {
            label: sampled_label,
            needed: target,
            available,
        });
    }

    let candidates: Vec<usize> = ds
        .rows
        .iter()
        .enumerate()
        .filter(|(_, row)| row.label == sampled_label)
        .map(|(i, _)| i)
        .collect();
    let mut shuffled = candidates;
    shuffled.shuffle(&mut substream_rng(seed, "balance"));
    let selected: BTreeSet<usize> = shuffled.into_iter().take(target).collect();

    let rows: Vec<DatasetRow> = ds
        .rows
        .iter()
        .enumerate()
        .filter(|(i, row)| row.label == kept_label || selected.contains(i))
        .map(|(_, row)| row.clone())
        .collect();

    let (benign_rows, malicious_rows) = {
        let malicious = rows.iter().filter(|r| r.label.is_malicious()).count();
        (rows.len() - malicious, malicious)
    };
    let note = format!(
        "kept all {kept_count} {kept_label} rows; sampled {target} of {available} {sampled_label} rows \
         (exact {benign_fraction}:{} ratio by rounding; seed {seed})",
        1.0 - benign_fraction
    );
    let mut provenance = ds.provenance.clone();
    provenance.balance = Some(BalanceInfo {
        benign_fraction,
        benign_rows,
        malicious_rows,
        note,
    });

    LabeledDataset::new(rows, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalizer::SubstitutionMap;

    fn write_file(dir: &tempfile::TempDir, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        fs::write(&path, content).unwrap();
        path
    }

    fn covid_keywords() -> KeywordSet {
        KeywordSet::new(
            vec!["covid".into(), "coronavirus".into()],
            KeywordSet::default_substitutions(),
        )
    }

    #[test]
    fn plain_feed_reads_data_lines_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            &dir,
            "feed.txt",
            "# comment\ncovid-a.com\n\ncovid-b.net\n   \ncovid-c.org\n",
        );
        let parse = read_feed(&path, FeedFormat::PlainLines).unwrap();
        assert_eq!(parse.records.len(), 3);
        assert!(parse.rejects.is_empty());
        assert_eq!(parse.records[0].domain, "covid-a.com");
        assert_eq!(parse.records[0].observed_date, None);
    }

    #[test]
    fn delimited_feed_parses_dates_and_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            &dir,
            "feed.csv",
            "domain,observed_date\ncovid-test.com,2020-04-07\nplain.net\nbad.org,not-a-date\nx.io,2020-01-01,extra\n",
        );
        let parse = read_feed(&path, FeedFormat::Delimited).unwrap();
        assert_eq!(parse.records.len(), 2);
        assert_eq!(
            parse.records[0].observed_date,
            Some(NaiveDate::from_ymd_opt(2020, 4, 7).unwrap())
        );
        assert_eq!(parse.records[1].domain, "plain.net");
        assert_eq!(parse.rejects.len(), 2);
        assert_eq!(parse.rejects[0].line, 4);
        assert!(parse.rejects[0].reason.contains("invalid date"));
        assert!(parse.rejects[1].reason.contains("more than two fields"));
    }

    #[test]
    fn missing_feed_file_is_an_io_error() {
        let err = read_feed(Path::new("/nonexistent/feed.txt"), FeedFormat::PlainLines)
            .unwrap_err();
        assert!(matches!(err, IngestError::Io { .. }));
    }

    #[test]
    fn threat_list_threshold_boundaries() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            &dir,
            "threats.csv",
            "domain,risk_rating\nat-threshold.com,70\nbelow.net,69\ntop.org,100\nover.io,101\njunk.co,high\n",
        );
        let parse = read_threat_list(&path, 70).unwrap();
        assert_eq!(parse.positives.len(), 2);
        assert_eq!(parse.positives[0].domain, "at-threshold.com");
        assert_eq!(parse.positives[0].risk_rating, 70);
        assert_eq!(parse.below_threshold, 1);
        assert_eq!(parse.rejects.len(), 2);
        assert!(parse.rejects[0].reason.contains("outside [0,100]"));

        assert!(matches!(
            read_threat_list(&path, 101),
            Err(IngestError::InvalidThreshold(101))
        ));
    }

    #[test]
    fn campaign_filter_matches_obfuscated_variants() {
        let records: Vec<DomainFeedRecord> = [
            "covid-help.com",
            "flowers.com",
            "c0vid-cure.net",
            "%%%",
        ]
        .iter()
        .map(|d| DomainFeedRecord {
            domain: d.to_string(),
            observed_date: None,
        })
        .collect();
        let result = filter_campaign(&records, &covid_keywords());
        assert_eq!(result.total, 4);
        assert_eq!(result.kept_count(), 2);
        assert_eq!(result.unparseable, 1);
        assert_eq!(result.kept[0].domain, "covid-help.com");
        assert_eq!(result.kept[1].domain, "c0vid-cure.net");

        let empty = KeywordSet::new(vec![], SubstitutionMap::new());
        assert_eq!(filter_campaign(&records, &empty).kept_count(), 0);
    }

    fn feed_of(domains: &[&str]) -> Vec<DomainFeedRecord> {
        domains
            .iter()
            .map(|d| DomainFeedRecord {
                domain: d.to_string(),
                observed_date: None,
            })
            .collect()
    }

    fn threats_of(entries: &[(&str, u8)]) -> Vec<ThreatListEntry> {
        entries
            .iter()
            .map(|(d, r)| ThreatListEntry {
                domain: d.to_string(),
                risk_rating: *r,
            })
            .collect()
    }

    #[test]
    fn labeling_matches_on_normalized_form() {
        let feed = feed_of(&["a-covid.com", "WWW.B-covid.COM", "c-covid.net"]);
        let threats = threats_of(&[("b-covid.com", 90)]);
        let ds = label_by_matching(&feed, &threats, &covid_keywords(), false, 1).unwrap();
        assert_eq!(ds.len(), 3);
        let labels: Vec<Label> = ds.rows().iter().map(|r| r.label).collect();
        assert_eq!(labels, vec![Label::Benign, Label::Malicious, Label::Benign]);
        assert!(ds.rows().iter().all(|r| r.source == DatasetSource::Feed));
        // canonical domain: original is the registrable form
        assert_eq!(ds.rows()[1].domain.original, "b-covid.com");
    }

    #[test]
    fn augmentation_appends_threat_only_domains() {
        let feed = feed_of(&["a-covid.com"]);
        let threats = threats_of(&[("a-covid.com", 80), ("extra-covid.net", 95)]);
        let ds = label_by_matching(&feed, &threats, &covid_keywords(), true, 1).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.rows()[1].domain.name, "extra-covid");
        assert_eq!(ds.rows()[1].label, Label::Malicious);
        assert_eq!(ds.rows()[1].source, DatasetSource::ThreatList);
        let (benign, malicious) = ds.class_counts();
        assert_eq!((benign, malicious), (0, 2));
    }

    #[test]
    fn duplicates_keep_first_occurrence_and_labeling_is_order_independent() {
        let feed = feed_of(&["dup-covid.com", "www.dup-covid.com", "other-covid.net"]);
        let threats = threats_of(&[("other-covid.net", 75)]);
        let ds = label_by_matching(&feed, &threats, &covid_keywords(), false, 1).unwrap();
        assert_eq!(ds.len(), 2);

        let reversed: Vec<DomainFeedRecord> = feed.into_iter().rev().collect();
        let ds2 = label_by_matching(&reversed, &threats, &covid_keywords(), false, 1).unwrap();
        let keys: BTreeSet<String> = ds.rows().iter().map(DatasetRow::key).collect();
        let keys2: BTreeSet<String> = ds2.rows().iter().map(DatasetRow::key).collect();
        assert_eq!(keys, keys2);
        for row in ds2.rows() {
            let original = ds.rows().iter().find(|r| r.key() == row.key()).unwrap();
            assert_eq!(original.label, row.label);
        }
    }

    fn unbalanced_dataset(benign: usize, malicious: usize) -> LabeledDataset {
        crate::synth::labeled_rows_dataset(benign, malicious, 5)
    }

    #[test]
    fn balance_arithmetic_is_exact() {
        let ds = unbalanced_dataset(1573, 7000);
        let balanced = balance(&ds, 0.2, 99).unwrap();
        let (benign, malicious) = balanced.class_counts();
        assert_eq!(benign, 1573);
        assert_eq!(malicious, 6292);
        let info = balanced.provenance().balance.as_ref().unwrap();
        assert_eq!(info.malicious_rows, 6292);
        assert!(info.note.contains("6292"));
    }

    #[test]
    fn balance_noop_and_shortfall() {
        let ds = unbalanced_dataset(100, 100);
        let balanced = balance(&ds, 0.5, 1).unwrap();
        assert_eq!(balanced.rows(), ds.rows());

        let small = unbalanced_dataset(10, 10);
        let err = balance(&small, 0.2, 1).unwrap_err();
        assert!(matches!(
            err,
            IngestError::Shortfall {
                label: Label::Malicious,
                needed: 40,
                available: 10
            }
        ));

        assert!(matches!(
            balance(&small, 0.0, 1),
            Err(IngestError::InvalidFraction(_))
        ));
    }

    #[test]
    fn balance_is_deterministic_and_preserves_rows() {
        let ds = unbalanced_dataset(20, 200);
        let a = balance(&ds, 0.2, 7).unwrap();
        let b = balance(&ds, 0.2, 7).unwrap();
        assert_eq!(a, b);
        let c = balance(&ds, 0.2, 8).unwrap();
        assert_ne!(a.rows(), c.rows());
        // every kept row appears unchanged in the source
        for row in a.rows() {
            assert!(ds.rows().contains(row));
        }
        // original order preserved
        let positions: Vec<usize> = a
            .rows()
            .iter()
            .map(|row| ds.rows().iter().position(|r| r == row).unwrap())
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn majority_benign_balances_the_other_way() {
        let ds = unbalanced_dataset(300, 50);
        let balanced = balance(&ds, 0.8, 3).unwrap();
        let (benign, malicious) = balanced.class_counts();
        assert_eq!(malicious, 50);
        assert_eq!(benign, 200);
    }

    #[test]
    fn dataset_invariants_are_enforced() {
        let d = normalize("covid-a.com", false).unwrap();
        let row = DatasetRow::from_domain(&d, Label::Benign, DatasetSource::Feed).unwrap();
        let dup = row.clone();
        let err = LabeledDataset::new(vec![row.clone(), dup], Provenance::synthetic("t", 0))
            .unwrap_err();
        assert!(matches!(err, IngestError::DuplicateRow(_)));

        let mut bad = row;
        bad.features.label = Some(Label::Malicious);
        assert!(matches!(
            LabeledDataset::new(vec![bad], Provenance::synthetic("t", 0)),
            Err(IngestError::LabelMismatch(_))
        ));

        let mut empty = Provenance::synthetic("t", 0);
        empty.keyword_hash = String::new();
        assert!(matches!(
            LabeledDataset::new(vec![], empty),
            Err(IngestError::EmptyProvenance("keyword_hash"))
        ));
    }
}
