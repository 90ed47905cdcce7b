//! End-to-end library pipeline: feed + threat list -> campaign filter ->
//! labeling -> balancing -> dataset file -> stats -> cross-validated
//! comparison report.

use std::fs;

use domsift_core::classifiers::Algorithm;
use domsift_core::evaluator::compare_report;
use domsift_core::featurizer::dataset_stats;
use domsift_core::ingestion::{
    balance, filter_campaign, label_by_matching, read_dataset, read_feed, read_threat_list,
    write_dataset, FeedFormat,
};
use domsift_core::normalizer::KeywordSet;
use domsift_core::synth::two_blob_dataset;

#[test]
fn feed_to_report_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let feed_path = dir.path().join("feed.csv");
    fs::write(
        &feed_path,
        "domain,observed_date\n\
         covid-help-center.com,2020-04-07\n\
         www.c0vid-masks.net,2020-04-08\n\
         coronavirus-live-map.org,\n\
         garden-supplies.com,2020-04-09\n\
         covid-help-center.com,2020-04-10\n\
         vacc1ne-booking.info,2020-04-11\n",
    )
    .unwrap();
    let threat_path = dir.path().join("threats.csv");
    fs::write(
        &threat_path,
        "domain,risk_rating\n\
         c0vid-masks.net,91\n\
         covid-loan-relief.com,84\n\
         coronavirus-donations.org,78\n\
         covid-tracing-app.net,89\n\
         covid-help-center.com,65\n",
    )
    .unwrap();

    let feed = read_feed(&feed_path, FeedFormat::Delimited).unwrap();
    assert_eq!(feed.records.len(), 6);
    assert!(feed.rejects.is_empty());

    let threats = read_threat_list(&threat_path, 70).unwrap();
    assert_eq!(threats.positives.len(), 4);
    assert_eq!(threats.below_threshold, 1);

    let ks = KeywordSet::new(
        vec!["covid".into(), "coronavirus".into(), "vaccine".into()],
        KeywordSet::default_substitutions(),
    );
    let filtered = filter_campaign(&feed.records, &ks);
    // garden-supplies drops out, the duplicate stays for the dedup stage
    assert_eq!(filtered.kept_count(), 5);

    let ds = label_by_matching(&filtered.kept, &threats.positives, &ks, true, 7).unwrap();
    // 4 unique feed rows (1 malicious via c0vid-masks) + 3 augmented
    assert_eq!(ds.len(), 7);
    let (benign, malicious) = ds.class_counts();
    assert_eq!((benign, malicious), (3, 4));

    // 3 benign at 50:50 keeps all benign and samples 3 of 4 malicious
    let balanced = balance(&ds, 0.5, 7).unwrap();
    assert_eq!(balanced.class_counts(), (3, 3));

    let path = dir.path().join("dataset.csv");
    write_dataset(&balanced, &path).unwrap();
    let loaded = read_dataset(&path).unwrap();
    assert_eq!(loaded, balanced);

    let stats = dataset_stats(&loaded).unwrap();
    assert_eq!(stats.benign_count + stats.malicious_count, 6);
    assert!(stats.benign.length > 0.0 && stats.malicious.length > 0.0);
}

/// Scale smoke test at realistic feed volume; run with `--ignored`.
#[test]
#[ignore]
fn full_scale_cross_validation_stays_fast() {
    use std::time::Instant;

    use domsift_core::classifiers::HyperParams;
    use domsift_core::evaluator::{cross_validate, stratified_folds};
    use domsift_core::featurizer::FeatureSetConfig;
    use domsift_core::synth::labeled_rows_dataset;

    let ds = labeled_rows_dataset(1573, 6292, 42);
    let plan = stratified_folds(&ds, 10, 42).unwrap();
    for algorithm in Algorithm::ALL {
        let hp = HyperParams::defaults(algorithm);
        let start = Instant::now();
        let result = cross_validate(&ds, &hp, FeatureSetConfig::with_entropy(), &plan).unwrap();
        let elapsed = start.elapsed();
        println!(
            "{:12} {elapsed:>8.2?}  tp={:.3} fp={:.3} auc={:.3}",
            algorithm.tag(),
            result.pooled.tp_rate.unwrap(),
            result.pooled.fp_rate.unwrap(),
            result.pooled.roc_auc.unwrap()
        );
        assert!(
            elapsed.as_secs_f64() < 120.0,
            "{algorithm} took {elapsed:?} for 10-fold CV on 7865 rows"
        );
    }
}

#[test]
fn blob_report_metrics_are_strong_for_every_algorithm() {
    let ds = two_blob_dataset(60, 99);
    let report = compare_report(&ds, &Algorithm::ALL, 6, 99).unwrap();
    assert_eq!(report.rows.len(), 10);
    for row in &report.rows {
        let tp = row.metrics.tp_rate.unwrap();
        let auc = row.metrics.roc_auc.unwrap();
        assert!(
            tp >= 0.9,
            "{} ({}): tp_rate {tp}",
            row.algorithm,
            row.with_entropy
        );
        assert!(auc >= 0.95, "{}: auc {auc}", row.algorithm);
    }
    // report bodies are reproducible
    let again = compare_report(&ds, &Algorithm::ALL, 6, 99).unwrap();
    assert_eq!(report.to_text(), again.to_text());
    assert_eq!(report.to_delimited(), again.to_delimited());
}
