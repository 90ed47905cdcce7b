//! Run configuration: a simple `key = value` file with command-line
//! overrides, so a whole pipeline run can be pinned by one artifact.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use domsift_core::classifiers::Algorithm;
use domsift_core::ingestion::FeedFormat;

/// A configuration or usage problem; mapped to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(message: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(message.into()))
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub keywords: Option<PathBuf>,
    pub substitutions: Option<PathBuf>,
    pub feed: Option<PathBuf>,
    pub feed_format: FeedFormat,
    pub threat_list: Option<PathBuf>,
    pub threat_threshold: u8,
    pub benign_fraction: f64,
    pub seed: u64,
    pub folds: usize,
    pub algorithms: Vec<Algorithm>,
    pub entropy_ablation: bool,
    /// Append threat-list domains absent from the feed as malicious rows.
    pub augment: bool,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            keywords: None,
            substitutions: None,
            feed: None,
            feed_format: FeedFormat::PlainLines,
            threat_list: None,
            threat_threshold: 70,
            benign_fraction: 0.2,
            seed: 42,
            folds: 10,
            algorithms: Algorithm::ALL.to_vec(),
            entropy_ablation: true,
            augment: true,
            out_dir: PathBuf::from("out"),
        }
    }
}

pub fn parse_algorithms(raw: &str) -> Result<Vec<Algorithm>, anyhow::Error> {
    let mut algorithms = Vec::new();
    for tag in raw.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let algorithm = Algorithm::from_tag(tag).ok_or_else(|| {
            usage(format!(
                "unknown algorithm {tag:?} (expected one of: {})",
                Algorithm::ALL
                    .iter()
                    .map(|a| a.tag())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })?;
        if !algorithms.contains(&algorithm) {
            algorithms.push(algorithm);
        }
    }
    if algorithms.is_empty() {
        return Err(usage("no algorithms given"));
    }
    Ok(algorithms)
}

impl RunConfig {
    /// Parse a `key = value` config file; '#' lines are comments. Unknown
    /// keys are usage errors.
    pub fn from_file(path: &Path) -> Result<RunConfig, anyhow::Error> {
        let content = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut config = RunConfig::default();
        let base = path.parent().unwrap_or(Path::new("."));
        // relative paths in the config resolve against the config file
        let resolve = |raw: &str| -> PathBuf {
            let p = PathBuf::from(raw);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        for (line_no, line) in content.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |message: String| {
                usage(format!("{}:{}: {message}", path.display(), line_no + 1))
            };
            let Some((key, value)) = line.split_once('=') else {
                return Err(at(format!("expected key = value, got {line:?}")));
            };
            let key = key.trim();
            let value = value.trim();
            match key {
                "keywords" => config.keywords = Some(resolve(value)),
                "substitutions" => config.substitutions = Some(resolve(value)),
                "feed" => config.feed = Some(resolve(value)),
                "feed_format" => {
                    config.feed_format = FeedFormat::from_tag(value).ok_or_else(|| {
                        at(format!("unknown feed_format {value:?} (plain or delimited)"))
                    })?
                }
                "threat_list" => config.threat_list = Some(resolve(value)),
                "threat_threshold" => {
                    config.threat_threshold = value
                        .parse()
                        .ok()
                        .filter(|t: &u8| *t <= 100)
                        .ok_or_else(|| at(format!("threat_threshold {value:?} not in [0,100]")))?
                }
                "benign_fraction" => {
                    config.benign_fraction = value
                        .parse()
                        .map_err(|_| at(format!("invalid benign_fraction {value:?}")))?
                }
                "seed" => {
                    config.seed = value
                        .parse()
                        .map_err(|_| at(format!("invalid seed {value:?}")))?
                }
                "folds" => {
                    config.folds = value
                        .parse()
                        .map_err(|_| at(format!("invalid fold count {value:?}")))?
                }
                "algorithms" => config.algorithms = parse_algorithms(value)?,
                "entropy_ablation" => {
                    config.entropy_ablation = value
                        .parse()
                        .map_err(|_| at(format!("invalid entropy_ablation {value:?}")))?
                }
                "augment" => {
                    config.augment = value
                        .parse()
                        .map_err(|_| at(format!("invalid augment {value:?}")))?
                }
                "out_dir" => config.out_dir = resolve(value),
                other => return Err(at(format!("unknown config key {other:?}"))),
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), anyhow::Error> {
        if self.folds < 2 {
            return Err(usage(format!("fold count must be >= 2, got {}", self.folds)));
        }
        if !(self.benign_fraction > 0.0 && self.benign_fraction < 1.0) {
            return Err(usage(format!(
                "benign_fraction must lie in (0,1), got {}",
                self.benign_fraction
            )));
        }
        if self.algorithms.is_empty() {
            return Err(usage("no algorithms configured"));
        }
        Ok(())
    }
}
