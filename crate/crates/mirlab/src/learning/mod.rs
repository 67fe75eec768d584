//! Supervised learning over separation runs: labels from multiplier
//! supports, gradient-boosted-tree training, evaluation, and prediction
//! of useful rows.

mod gbt;

pub use gbt::{
    train_gbt, GbtHyperparams, GbtModel, RegressionTree, TrainReport, TreeNode,
    MODEL_SCHEMA_VERSION,
};

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureVector, FEATURE_SCHEMA_VERSION};
use crate::mirsep::SeparationSolution;

/// Multiplier threshold: a row is useful when some pool cut exceeds it.
pub const LABEL_EPSILON: f64 = 1e-6;
/// Deployment probability threshold.
pub const PREDICT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("feature schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid learning config: {0}")]
    ConfigError(String),
}

/// One training observation: a featurized constraint and whether it
/// carried a nonzero multiplier in that round's cut pool.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub features: FeatureVector,
    pub label: bool,
}

/// Confusion-matrix metrics; precision and recall are `None` when their
/// denominator is zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
}

/// Row labels for one separation round: entry `j` is true iff any pool
/// solution carries `|lambda_j| > epsilon`.
pub fn label_round(pool: &[SeparationSolution], num_rows: usize, epsilon: f64) -> Vec<bool> {
    let mut labels = vec![false; num_rows];
    for sol in pool {
        for (j, &l) in sol.lambda.iter().enumerate() {
            if j < num_rows && l.abs() > epsilon {
                labels[j] = true;
            }
        }
    }
    labels
}

/// Rows the model predicts to be useful at the probability threshold.
pub fn predict_useful(
    model: &GbtModel,
    features: &[FeatureVector],
    threshold: f64,
) -> Result<BTreeSet<usize>, LearnError> {
    if model.feature_schema != FEATURE_SCHEMA_VERSION {
        return Err(LearnError::SchemaMismatch(format!(
            "model built for {}, runtime is {FEATURE_SCHEMA_VERSION}",
            model.feature_schema
        )));
    }
    Ok(features
        .iter()
        .filter(|fv| model.predict_proba(&fv.values) >= threshold)
        .map(|fv| fv.row_index)
        .collect())
}

/// Accuracy/precision/recall of the model at the deployment threshold.
pub fn evaluate(model: &GbtModel, dataset: &[LabeledSample]) -> Result<EvalReport, LearnError> {
    if dataset.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    let mut tp = 0;
    let mut fp = 0;
    let mut fneg = 0;
    let mut tn = 0;
    for sample in dataset {
        let predicted = model.predict_proba(&sample.features.values) >= PREDICT_THRESHOLD;
        match (predicted, sample.label) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(report_from_counts(tp, fp, fneg, tn))
}

/// Metrics from raw confusion counts.
pub fn report_from_counts(tp: usize, fp: usize, fneg: usize, tn: usize) -> EvalReport {
    let total = tp + fp + fneg + tn;
    EvalReport {
        accuracy: (tp + tn) as f64 / total as f64,
        precision: (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64),
        recall: (tp + fneg > 0).then(|| tp as f64 / (tp + fneg) as f64),
        true_pos: tp,
        false_pos: fp,
        false_neg: fneg,
        true_neg: tn,
    }
}

/// Splits a dataset by instance variation: all rounds of one variation
/// land on the same side. `train_fraction` of the distinct variations go
/// to the training side (at least one on each side).
pub fn split_by_variation(
    dataset: &[LabeledSample],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<LabeledSample>, Vec<LabeledSample>), LearnError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(LearnError::ConfigError(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let mut ids: Vec<&str> = dataset.iter().map(|s| s.features.instance_id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() < 2 {
        return Err(LearnError::ConfigError(format!(
            "cannot split {} variation(s) into train and test",
            ids.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let train_count = ((ids.len() as f64 * train_fraction).round() as usize)
        .clamp(1, ids.len() - 1);
    let train_ids: BTreeSet<&str> = ids[..train_count].iter().copied().collect();
    let (train, test): (Vec<LabeledSample>, Vec<LabeledSample>) = dataset
        .iter()
        .cloned()
        .partition(|s| train_ids.contains(s.features.instance_id.as_str()));
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;

    fn solution_with_lambda(lambda: Vec<f64>) -> SeparationSolution {
        let mut sol = SeparationSolution::zero(lambda.len(), 1, 1, 2);
        sol.lambda = lambda;
        sol
    }

    fn sample(id: &str, round: usize, values: Vec<f64>, label: bool) -> LabeledSample {
        LabeledSample {
            features: FeatureVector {
                values,
                row_index: 0,
                round,
                instance_id: id.into(),
            },
            label,
        }
    }

    #[test]
    fn empty_pool_labels_all_negative() {
        assert_eq!(label_round(&[], 3, LABEL_EPSILON), vec![false, false, false]);
    }

    #[test]
    fn single_support_labels() {
        let pool = vec![solution_with_lambda(vec![0.5, 0.0, 0.0])];
        assert_eq!(label_round(&pool, 3, 1e-6), vec![true, false, false]);
    }

    #[test]
    fn labels_are_union_of_supports() {
        let pool = vec![
            solution_with_lambda(vec![0.3, 0.0, 0.0]),
            solution_with_lambda(vec![0.0, 0.0, -0.7]),
        ];
        assert_eq!(label_round(&pool, 3, 1e-6), vec![true, false, true]);
        // permuting the pool leaves labels unchanged
        let swapped = vec![pool[1].clone(), pool[0].clone()];
        assert_eq!(label_round(&swapped, 3, 1e-6), label_round(&pool, 3, 1e-6));
    }

    #[test]
    fn confusion_arithmetic() {
        // TP=3 FP=1 FN=2 TN=4 -> accuracy 0.7, precision 0.75, recall 0.6
        let report = report_from_counts(3, 1, 2, 4);
        assert!((report.accuracy - 0.7).abs() < 1e-12);
        assert!((report.precision.unwrap() - 0.75).abs() < 1e-12);
        assert!((report.recall.unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn all_negative_predictions_leave_precision_undefined() {
        let data: Vec<LabeledSample> = (0..10)
            .map(|i| sample("a", 1, vec![0.0], i % 2 == 0))
            .collect();
        // constant-negative model
        let model = GbtModel {
            schema_version: MODEL_SCHEMA_VERSION.into(),
            feature_schema: FEATURE_SCHEMA_VERSION.into(),
            hyperparams: GbtHyperparams::default(),
            init_log_odds: -50.0,
            trees: Vec::new(),
            single_class: true,
        };
        let report = evaluate(&model, &data).unwrap();
        assert!(report.precision.is_none());
        assert_eq!(report.recall, Some(0.0));
    }

    #[test]
    fn stump_predictions_trace() {
        // single stump on feature 0 at 0.5 with a positive right leaf
        let tree = RegressionTree {
            nodes: vec![
                TreeNode {
                    feature: 0,
                    threshold: 0.5,
                    left: 1,
                    right: 2,
                    value: 0.0,
                    is_leaf: false,
                },
                TreeNode {
                    feature: 0,
                    threshold: 0.0,
                    left: 0,
                    right: 0,
                    value: -10.0,
                    is_leaf: true,
                },
                TreeNode {
                    feature: 0,
                    threshold: 0.0,
                    left: 0,
                    right: 0,
                    value: 10.0,
                    is_leaf: true,
                },
            ],
        };
        let model = GbtModel {
            schema_version: MODEL_SCHEMA_VERSION.into(),
            feature_schema: FEATURE_SCHEMA_VERSION.into(),
            hyperparams: GbtHyperparams {
                learning_rate: 1.0,
                ..GbtHyperparams::default()
            },
            init_log_odds: 0.0,
            trees: vec![tree],
            single_class: false,
        };
        let mut fvs = Vec::new();
        for (row, f0) in [(0usize, 0.2), (1, 0.6), (2, 0.9)] {
            fvs.push(FeatureVector {
                values: vec![f0],
                row_index: row,
                round: 1,
                instance_id: "t".into(),
            });
        }
        let rows = predict_useful(&model, &fvs, 0.5).unwrap();
        assert_eq!(rows.into_iter().collect::<Vec<_>>(), vec![1, 2]);
        // threshold 0 keeps everything, above 1 keeps nothing
        assert_eq!(predict_useful(&model, &fvs, 0.0).unwrap().len(), 3);
        assert!(predict_useful(&model, &fvs, 1.1).unwrap().is_empty());
    }

    #[test]
    fn schema_mismatch_rejected() {
        let model = GbtModel {
            schema_version: MODEL_SCHEMA_VERSION.into(),
            feature_schema: "something-else-v9".into(),
            hyperparams: GbtHyperparams::default(),
            init_log_odds: 0.0,
            trees: Vec::new(),
            single_class: false,
        };
        assert!(matches!(
            predict_useful(&model, &[], 0.5),
            Err(LearnError::SchemaMismatch(_))
        ));
    }

    #[test]
    fn split_keeps_variations_together() {
        let mut data = Vec::new();
        for id in 0..10 {
            for round in 1..=3 {
                data.push(sample(&format!("var{id}"), round, vec![id as f64], id % 2 == 0));
            }
        }
        let (train, test) = split_by_variation(&data, 0.8, 7).unwrap();
        assert_eq!(train.len() + test.len(), data.len());
        let train_ids: BTreeSet<&str> =
            train.iter().map(|s| s.features.instance_id.as_str()).collect();
        let test_ids: BTreeSet<&str> =
            test.iter().map(|s| s.features.instance_id.as_str()).collect();
        assert!(train_ids.is_disjoint(&test_ids));
        assert_eq!(train_ids.len(), 8);
        assert_eq!(test_ids.len(), 2);
        // same seed reproduces the split
        let (train2, _) = split_by_variation(&data, 0.8, 7).unwrap();
        assert_eq!(train, train2);
    }

    #[test]
    fn split_needs_two_variations() {
        let data: Vec<LabeledSample> =
            (0..5).map(|i| sample("only", 1, vec![i as f64], true)).collect();
        assert!(matches!(
            split_by_variation(&data, 0.8, 0),
            Err(LearnError::ConfigError(_))
        ));
    }
}
