//! Registration-time lexical analysis and classification of domain names.
//!
//! The pipeline ingests newly-registered-domain feeds, filters them for
//! campaign keywords (including leetspeak obfuscations such as `c0vid`),
//! labels records by cross-matching against a risk-rated threat list,
//! extracts four lexical features (name length, hyphen count, digit count,
//! Shannon entropy), trains any of five binary classifiers behind one
//! train/predict/score contract, and compares them under stratified k-fold
//! cross-validation with and without the entropy feature.
//!
//! Everything is deterministic: all randomness flows from a single master
//! seed through named substreams, so datasets, models, and reports are
//! reproducible byte for byte.

pub mod classifiers;
pub mod evaluator;
pub mod featurizer;
pub mod ingestion;
pub mod normalizer;
pub mod seeding;
pub mod synth;

pub use classifiers::{train, Algorithm, HyperParams, TrainedModel};
pub use featurizer::{FeatureSetConfig, FeatureVector, Label};
pub use ingestion::{DatasetRow, LabeledDataset};
pub use normalizer::{normalize, KeywordSet, NormalizedDomain};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_types_are_safe_to_hand_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<NormalizedDomain>();
        assert_send_sync::<KeywordSet>();
        assert_send_sync::<FeatureVector>();
        assert_send_sync::<LabeledDataset>();
        assert_send_sync::<TrainedModel>();
        assert_send_sync::<evaluator::FoldPlan>();
        assert_send_sync::<evaluator::ComparisonReport>();
    }
}
