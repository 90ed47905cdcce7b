//! The dataset file format: a '#'-prefixed provenance header block, the
//! exact column header `domain,length,hyphens,digits,entropy,label`, and
//! one row per domain. A SHA-256 checksum in the header guards everything
//! after the checksum line, and floats are written in shortest round-trip
//! form, so write -> read is an identity and two consecutive writes are
//! byte-identical.

use std::fs;
use std::path::Path;

use crate::featurizer::{FeatureVector, Label};
use crate::normalizer::normalize;
use crate::seeding::sha256_hex;

use super::{
    BalanceInfo, DatasetRow, DatasetSource, IngestError, LabeledDataset, Provenance,
};

const MAGIC: &str = "# domsift dataset v1";
const COLUMNS: &str = "domain,length,hyphens,digits,entropy,label";

/// Serialized column header plus data rows; hashed for both the checksum
/// and the dataset fingerprint.
pub(super) fn body_string(ds: &LabeledDataset) -> String {
    let mut body = String::from(COLUMNS);
    body.push('\n');
    for row in ds.rows() {
        let f = &row.features;
        body.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.domain.registrable(),
            f.length,
            f.hyphens,
            f.digits,
            f.entropy,
            row.label.as_u8()
        ));
    }
    body
}

/// Run-length encoding of the per-row source tags, e.g. `feed:7,threat:13`.
fn sources_line(ds: &LabeledDataset) -> String {
    let mut blocks: Vec<(DatasetSource, usize)> = Vec::new();
    for row in ds.rows() {
        match blocks.last_mut() {
            Some((tag, count)) if *tag == row.source => *count += 1,
            _ => blocks.push((row.source, 1)),
        }
    }
    blocks
        .iter()
        .map(|(tag, count)| format!("{}:{count}", tag.tag()))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_sources(raw: &str, expected_rows: usize) -> Result<Vec<DatasetSource>, IngestError> {
    let mut sources = Vec::with_capacity(expected_rows);
    if !raw.is_empty() {
        for block in raw.split(',') {
            let (tag, count) = block.split_once(':').ok_or(IngestError::ParseRow {
                line: 0,
                message: format!("malformed sources block {block:?}"),
            })?;
            let source = DatasetSource::from_tag(tag).ok_or(IngestError::ParseRow {
                line: 0,
                message: format!("unknown source tag {tag:?}"),
            })?;
            let count: usize = count.parse().map_err(|_| IngestError::ParseRow {
                line: 0,
                message: format!("invalid source count {count:?}"),
            })?;
            sources.extend(std::iter::repeat_n(source, count));
        }
    }
    if sources.len() != expected_rows {
        return Err(IngestError::ParseRow {
            line: 0,
            message: format!(
                "sources cover {} rows but the dataset has {expected_rows}",
                sources.len()
            ),
        });
    }
    Ok(sources)
}

pub fn dataset_to_string(ds: &LabeledDataset) -> Result<String, IngestError> {
    for row in ds.rows() {
        let registrable = row.domain.registrable();
        if registrable.contains([',', '\n', '\r']) || registrable.contains(char::is_whitespace) {
            return Err(IngestError::Unserializable(registrable));
        }
        if !row.features.entropy.is_finite() {
            return Err(IngestError::Unserializable(registrable));
        }
    }

    let p = ds.provenance();
    let body = body_string(ds);
    let mut out = String::from(MAGIC);
    out.push('\n');
    out.push_str(&format!("# feed_fingerprint: {}\n", p.feed_fingerprint));
    out.push_str(&format!("# threat_fingerprint: {}\n", p.threat_fingerprint));
    out.push_str(&format!("# keyword_hash: {}\n", p.keyword_hash));
    out.push_str(&format!("# seed: {}\n", p.seed));
    if let Some(b) = &p.balance {
        out.push_str(&format!(
            "# balance: benign_fraction={} benign={} malicious={} note={}\n",
            b.benign_fraction, b.benign_rows, b.malicious_rows, b.note
        ));
    }
    out.push_str(&format!("# sources: {}\n", sources_line(ds)));
    out.push_str(&format!("# checksum: {}\n", sha256_hex(body.as_bytes())));
    out.push_str(&body);
    Ok(out)
}

pub fn write_dataset(ds: &LabeledDataset, path: &Path) -> Result<(), IngestError> {
    let content = dataset_to_string(ds)?;
    fs::write(path, content).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn dataset_from_str(content: &str) -> Result<LabeledDataset, IngestError> {
    let mut offset = 0usize;
    let mut line_no = 0usize;
    let mut feed_fingerprint = None;
    let mut threat_fingerprint = None;
    let mut keyword_hash = None;
    let mut seed = None;
    let mut balance = None;
    let mut sources_raw: Option<String> = None;
    let mut checksum = None;
    let mut body_start = None;

    for line in content.split_inclusive('\n') {
        line_no += 1;
        let trimmed = line.trim_end_matches(['\n', '\r']);
        if line_no == 1 {
            if trimmed != MAGIC {
                return Err(IngestError::SchemaVersion {
                    expected: MAGIC.to_string(),
                    got: trimmed.to_string(),
                });
            }
            offset += line.len();
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("# ") {
            let (key, value) = rest.split_once(": ").ok_or(IngestError::ParseRow {
                line: line_no,
                message: format!("malformed header line {trimmed:?}"),
            })?;
            match key {
                "feed_fingerprint" => feed_fingerprint = Some(value.to_string()),
                "threat_fingerprint" => threat_fingerprint = Some(value.to_string()),
                "keyword_hash" => keyword_hash = Some(value.to_string()),
                "seed" => {
                    seed = Some(value.parse::<u64>().map_err(|_| IngestError::ParseRow {
                        line: line_no,
                        message: format!("invalid seed {value:?}"),
                    })?)
                }
                "balance" => balance = Some(parse_balance(value, line_no)?),
                "sources" => sources_raw = Some(value.to_string()),
                "checksum" => {
                    checksum = Some(value.to_string());
                    body_start = Some(offset + line.len());
                }
                other => {
                    return Err(IngestError::ParseRow {
                        line: line_no,
                        message: format!("unknown header key {other:?}"),
                    })
                }
            }
            offset += line.len();
            if body_start.is_some() {
                break;
            }
            continue;
        }
        // non-comment line before the checksum: header is incomplete
        break;
    }

    let checksum = checksum.ok_or(IngestError::MissingHeader("checksum"))?;
    let body_start = body_start.expect("checksum sets the body offset");
    let body = &content[body_start..];
    let actual = sha256_hex(body.as_bytes());
    if actual != checksum {
        return Err(IngestError::ChecksumMismatch {
            header: checksum,
            actual,
        });
    }

    let provenance = Provenance {
        version: 1,
        feed_fingerprint: feed_fingerprint.ok_or(IngestError::MissingHeader("feed_fingerprint"))?,
        threat_fingerprint: threat_fingerprint
            .ok_or(IngestError::MissingHeader("threat_fingerprint"))?,
        keyword_hash: keyword_hash.ok_or(IngestError::MissingHeader("keyword_hash"))?,
        seed: seed.ok_or(IngestError::MissingHeader("seed"))?,
        balance,
    };

    let mut body_lines = body.lines();
    let header_line_no = line_no + 1;
    match body_lines.next() {
        Some(line) if line == COLUMNS => {}
        other => {
            return Err(IngestError::ParseRow {
                line: header_line_no,
                message: format!("expected column header {COLUMNS:?}, got {other:?}"),
            })
        }
    }

    let mut parsed_rows = Vec::new();
    for (i, line) in body_lines.enumerate() {
        let row_line = header_line_no + 1 + i;
        if line.is_empty() {
            continue;
        }
        parsed_rows.push(parse_row(line, row_line)?);
    }

    let sources = parse_sources(
        sources_raw
            .ok_or(IngestError::MissingHeader("sources"))?
            .as_str(),
        parsed_rows.len(),
    )?;

    let rows: Vec<DatasetRow> = parsed_rows
        .into_iter()
        .zip(sources)
        .map(|((domain, features, label), source)| DatasetRow {
            domain,
            features,
            label,
            source,
        })
        .collect();

    LabeledDataset::new(rows, provenance)
}

fn parse_balance(raw: &str, line: usize) -> Result<BalanceInfo, IngestError> {
    let err = |message: String| IngestError::ParseRow { line, message };
    // note= consumes the rest of the line, so split it off first
    let (fields, note) = raw
        .split_once(" note=")
        .ok_or_else(|| err("balance line is missing note=".into()))?;
    let mut benign_fraction = None;
    let mut benign_rows = None;
    let mut malicious_rows = None;
    for field in fields.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| err(format!("malformed balance field {field:?}")))?;
        match key {
            "benign_fraction" => {
                benign_fraction =
                    Some(value.parse::<f64>().map_err(|_| {
                        err(format!("invalid benign_fraction {value:?}"))
                    })?)
            }
            "benign" => {
                benign_rows = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| err(format!("invalid benign count {value:?}")))?,
                )
            }
            "malicious" => {
                malicious_rows = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| err(format!("invalid malicious count {value:?}")))?,
                )
            }
            other => return Err(err(format!("unknown balance field {other:?}"))),
        }
    }
    Ok(BalanceInfo {
        benign_fraction: benign_fraction
            .ok_or_else(|| err("balance line is missing benign_fraction".into()))?,
        benign_rows: benign_rows.ok_or_else(|| err("balance line is missing benign".into()))?,
        malicious_rows: malicious_rows
            .ok_or_else(|| err("balance line is missing malicious".into()))?,
        note: note.to_string(),
    })
}

type ParsedRow = (crate::normalizer::NormalizedDomain, FeatureVector, Label);

fn parse_row(line: &str, line_no: usize) -> Result<ParsedRow, IngestError> {
    let err = |message: String| IngestError::ParseRow {
        line: line_no,
        message,
    };
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 6 {
        return Err(err(format!("expected 6 fields, got {}", fields.len())));
    }
    let domain = normalize(fields[0], false)?;
    let length: usize = fields[1]
        .parse()
        .map_err(|_| err(format!("invalid length {:?}", fields[1])))?;
    let hyphens: usize = fields[2]
        .parse()
        .map_err(|_| err(format!("invalid hyphen count {:?}", fields[2])))?;
    let digits: usize = fields[3]
        .parse()
        .map_err(|_| err(format!("invalid digit count {:?}", fields[3])))?;
    let entropy: f64 = fields[4]
        .parse()
        .map_err(|_| err(format!("invalid entropy {:?}", fields[4])))?;
    let label = fields[5]
        .parse::<u8>()
        .ok()
        .and_then(Label::from_u8)
        .ok_or_else(|| err(format!("invalid label {:?} (expected 0 or 1)", fields[5])))?;

    if length == 0 {
        return Err(err("length must be >= 1".into()));
    }
    if hyphens > length || digits > length {
        return Err(err("counts exceed the name length".into()));
    }
    if !entropy.is_finite() || entropy < 0.0 {
        return Err(err(format!("entropy {entropy} out of range")));
    }

    Ok((
        domain,
        FeatureVector {
            length,
            hyphens,
            digits,
            entropy,
            label: Some(label),
        },
        label,
    ))
}

pub fn read_dataset(path: &Path) -> Result<LabeledDataset, IngestError> {
    let content = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    dataset_from_str(&content)
}
