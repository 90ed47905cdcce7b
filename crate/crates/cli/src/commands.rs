//! The pipeline subcommands: ingest -> stats -> evaluate -> score.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;

use domsift_core::classifiers::{train, HyperParams, TrainedModel};
use domsift_core::evaluator::{
    compare_report, cross_validate, stratified_folds, ComparisonReport, ReportRow,
};
use domsift_core::featurizer::{dataset_stats, extract_features, FeatureSetConfig, Label};
use domsift_core::ingestion::{
    balance, filter_campaign, label_by_matching, read_dataset, read_feed, read_threat_list,
    write_dataset, LabeledDataset,
};
use domsift_core::normalizer::{normalize, KeywordSet};

use crate::config::{usage, RunConfig};

/// Group a count with thousands separators ("27841" -> "27,841").
pub fn group_thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn ensure_out_dir(dir: &Path) -> Result<(), anyhow::Error> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn load_keywords(config: &RunConfig) -> Result<KeywordSet, anyhow::Error> {
    let keywords = config
        .keywords
        .as_ref()
        .ok_or_else(|| usage("no keyword file configured (set keywords= or pass --keywords)"))?;
    KeywordSet::from_files(keywords, config.substitutions.as_deref())
        .context("loading keyword set")
}

pub fn cmd_ingest(config: &RunConfig) -> Result<PathBuf, anyhow::Error> {
    let feed_path = config
        .feed
        .as_ref()
        .ok_or_else(|| usage("no feed configured (set feed= or pass --feed)"))?;
    let threat_path = config.threat_list.as_ref().ok_or_else(|| {
        usage("no threat list configured (set threat_list= or pass --threat-list)")
    })?;
    let ks = load_keywords(config)?;
    ensure_out_dir(&config.out_dir)?;

    let feed = read_feed(feed_path, config.feed_format).context("reading feed")?;
    println!(
        "feed: {} ({} records, {} rejected lines)",
        feed_path.display(),
        group_thousands(feed.records.len()),
        feed.rejects.len()
    );
    for reject in &feed.rejects {
        eprintln!(
            "  rejected {}:{}: {} ({})",
            feed_path.display(),
            reject.line,
            reject.content,
            reject.reason
        );
    }

    let threats = read_threat_list(threat_path, config.threat_threshold)
        .context("reading threat list")?;
    println!(
        "threat list: {} positives at threshold {} ({} below threshold, {} rejected lines)",
        group_thousands(threats.positives.len()),
        config.threat_threshold,
        threats.below_threshold,
        threats.rejects.len()
    );
    for reject in &threats.rejects {
        eprintln!(
            "  rejected {}:{}: {} ({})",
            threat_path.display(),
            reject.line,
            reject.content,
            reject.reason
        );
    }

    let filtered = filter_campaign(&feed.records, &ks);
    println!(
        "{} domain names scanned, {} containing campaign keywords",
        group_thousands(filtered.total),
        group_thousands(filtered.kept_count())
    );

    let ds = label_by_matching(
        &filtered.kept,
        &threats.positives,
        &ks,
        config.augment,
        config.seed,
    )
    .context("labeling")?;
    let (benign, malicious) = ds.class_counts();
    let appended = ds
        .rows()
        .iter()
        .filter(|r| r.source == domsift_core::ingestion::DatasetSource::ThreatList)
        .count();
    println!(
        "labels: {} benign, {} malicious ({} appended from the threat list)",
        group_thousands(benign),
        group_thousands(malicious),
        group_thousands(appended)
    );

    let balanced = balance(&ds, config.benign_fraction, config.seed).context("balancing")?;
    let (benign, malicious) = balanced.class_counts();
    println!(
        "balance: {} benign, {} malicious (benign fraction {})",
        group_thousands(benign),
        group_thousands(malicious),
        config.benign_fraction
    );

    let out = config.out_dir.join("dataset.csv");
    write_dataset(&balanced, &out).context("writing dataset")?;
    println!(
        "dataset: {} ({} rows)",
        out.display(),
        group_thousands(balanced.len())
    );
    Ok(out)
}

pub fn cmd_stats(dataset: &Path) -> Result<String, anyhow::Error> {
    let ds = read_dataset(dataset).context("reading dataset")?;
    let stats = dataset_stats(&ds).context("computing feature statistics")?;
    let mut out = stats.to_table();
    out.push_str(&format!(
        "rows: {} legitimate, {} malicious\n",
        group_thousands(stats.benign_count),
        group_thousands(stats.malicious_count)
    ));
    print!("{out}");
    Ok(out)
}

/// Build the comparison report. With ablation on, every algorithm runs
/// with and without entropy over one shared fold plan; with ablation off
/// only the entropy arm runs.
fn build_report(
    ds: &LabeledDataset,
    config: &RunConfig,
) -> Result<ComparisonReport, anyhow::Error> {
    if config.entropy_ablation {
        return compare_report(ds, &config.algorithms, config.folds, config.seed)
            .context("cross-validating");
    }
    let plan = stratified_folds(ds, config.folds, config.seed).context("planning folds")?;
    let plan_hash = plan.plan_hash();
    let mut rows = Vec::new();
    for &algorithm in &config.algorithms {
        let mut hp = HyperParams::defaults(algorithm);
        hp.seed = config.seed;
        let result = cross_validate(ds, &hp, FeatureSetConfig::with_entropy(), &plan)
            .with_context(|| format!("cross-validating {algorithm}"))?;
        rows.push(ReportRow {
            algorithm,
            with_entropy: true,
            metrics: result.pooled,
            plan_hash: plan_hash.clone(),
        });
    }
    Ok(ComparisonReport {
        rows,
        dataset_fingerprint: ds.fingerprint(),
        seed: config.seed,
        fold_count: config.folds,
        plan_hash,
        timestamp: None,
    })
}

pub fn cmd_evaluate(dataset: &Path, config: &RunConfig) -> Result<(), anyhow::Error> {
    let ds = read_dataset(dataset).context("reading dataset")?;
    ensure_out_dir(&config.out_dir)?;

    let report = build_report(&ds, config)?;
    let text = report.to_text();
    print!("{text}");

    fs::write(config.out_dir.join("report.txt"), &text).context("writing report.txt")?;
    fs::write(config.out_dir.join("report.csv"), report.to_delimited())
        .context("writing report.csv")?;
    // timestamps live in a sidecar so the report bodies stay reproducible
    let meta = format!(
        "timestamp: {}\ndataset_file: {}\n",
        chrono::Utc::now().to_rfc3339(),
        dataset.display()
    );
    fs::write(config.out_dir.join("report.meta.txt"), meta).context("writing report.meta.txt")?;

    // final models over the full dataset, one per algorithm, for `score`
    for &algorithm in &config.algorithms {
        let mut hp = HyperParams::defaults(algorithm);
        hp.seed = config.seed;
        let model = train(&ds, &hp, FeatureSetConfig::with_entropy())
            .with_context(|| format!("training final {algorithm} model"))?;
        let path = config.out_dir.join(format!("model_{}.txt", algorithm.tag()));
        model.save(&path).context("saving model")?;
    }
    println!(
        "reports and {} model file(s) written to {}",
        config.algorithms.len(),
        config.out_dir.display()
    );
    Ok(())
}

pub fn cmd_score(
    model_path: &Path,
    domains: &[String],
    file: Option<&Path>,
    strict: bool,
) -> Result<(), anyhow::Error> {
    let model = TrainedModel::load(model_path).context("loading model")?;
    let mut inputs: Vec<String> = domains.to_vec();
    if let Some(path) = file {
        let content = fs::read_to_string(path)
            .with_context(|| format!("cannot read domain file {}", path.display()))?;
        inputs.extend(
            content
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(String::from),
        );
    }
    if inputs.is_empty() {
        return Err(usage("no domains to score (pass arguments or --file)"));
    }

    let mut errors = 0usize;
    for input in &inputs {
        let outcome = normalize(input, strict)
            .map_err(anyhow::Error::from)
            .and_then(|domain| {
                let fv = extract_features(&domain, None)?;
                let score = model.score(&fv)?;
                let label = model.predict(&fv)?;
                Ok((score, label))
            });
        match outcome {
            Ok((score, label)) => {
                let verdict = match label {
                    Label::Malicious => "malicious",
                    Label::Benign => "benign",
                };
                println!("{input}\t{score}\t{verdict}");
            }
            Err(err) => {
                errors += 1;
                eprintln!("cannot score {input:?}: {err}");
                println!("{input}\tN/A\tERROR");
            }
        }
    }
    if strict && errors > 0 {
        anyhow::bail!("{errors} of {} domains failed to score", inputs.len());
    }
    Ok(())
}
