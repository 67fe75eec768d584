//! Gradient-boosted regression trees with logistic loss, grown by exact
//! greedy split search. Defaults mirror the usual library settings (100
//! trees, learning rate 0.1) with the tree depth raised to 5.
//!
//! Training is fully deterministic: split ties break on the lowest
//! feature index, then the lowest threshold, and there is no subsampling.

use serde::{Deserialize, Serialize};

use super::{LabeledSample, LearnError};
use crate::features::FEATURE_SCHEMA_VERSION;

pub const MODEL_SCHEMA_VERSION: &str = "mir-gbt-model-v1";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbtHyperparams {
    pub num_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
}

impl Default for GbtHyperparams {
    fn default() -> Self {
        GbtHyperparams {
            num_trees: 100,
            learning_rate: 0.1,
            max_depth: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub feature: usize,
    pub threshold: f64,
    /// Child indices; leaves keep both at 0 with `is_leaf` set.
    pub left: usize,
    pub right: usize,
    pub value: f64,
    pub is_leaf: bool,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn predict(&self, features: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            let node = &self.nodes[idx];
            if node.is_leaf {
                return node.value;
            }
            idx = if features[node.feature] <= node.threshold {
                node.left
            } else {
                node.right
            };
        }
    }

    pub fn max_depth(&self) -> usize {
        fn depth(nodes: &[TreeNode], idx: usize) -> usize {
            let node = &nodes[idx];
            if node.is_leaf {
                0
            } else {
                1 + depth(nodes, node.left).max(depth(nodes, node.right))
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            depth(&self.nodes, 0)
        }
    }
}

/// A trained binary classifier: `p = sigmoid(init + lr * sum_t tree_t(x))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub schema_version: String,
    pub feature_schema: String,
    pub hyperparams: GbtHyperparams,
    pub init_log_odds: f64,
    pub trees: Vec<RegressionTree>,
    /// Set when the training labels were constant; the model then predicts
    /// the base rate regardless of input.
    pub single_class: bool,
}

/// Per-training diagnostics.
#[derive(Clone, Debug, Default)]
pub struct TrainReport {
    /// Mean logistic loss on the training set after each boosting round.
    pub per_iteration_loss: Vec<f64>,
    pub single_class: bool,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl GbtModel {
    pub fn raw_score(&self, features: &[f64]) -> f64 {
        let boost: f64 = self.trees.iter().map(|t| t.predict(features)).sum();
        self.init_log_odds + self.hyperparams.learning_rate * boost
    }

    pub fn predict_proba(&self, features: &[f64]) -> f64 {
        sigmoid(self.raw_score(features))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LearnError> {
        let model: GbtModel =
            serde_json::from_str(text).map_err(|e| LearnError::ConfigError(e.to_string()))?;
        if model.schema_version != MODEL_SCHEMA_VERSION {
            return Err(LearnError::SchemaMismatch(format!(
                "model schema {} (expected {MODEL_SCHEMA_VERSION})",
                model.schema_version
            )));
        }
        Ok(model)
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    sse: f64,
}

fn sse_of(sum: f64, sq_sum: f64, count: f64) -> f64 {
    sq_sum - sum * sum / count
}

/// Best split of `rows` by squared error on the residuals; `None` when no
/// feature offers two distinct values.
fn best_split(samples: &[&LabeledSample], residuals: &[f64], rows: &[usize]) -> Option<SplitChoice> {
    let num_features = samples[0].features.values.len();
    let mut best: Option<SplitChoice> = None;
    let mut order: Vec<usize> = rows.to_vec();
    for feature in 0..num_features {
        order.sort_by(|&a, &b| {
            samples[a].features.values[feature].total_cmp(&samples[b].features.values[feature])
        });
        let total_sum: f64 = order.iter().map(|&r| residuals[r]).sum();
        let total_sq: f64 = order.iter().map(|&r| residuals[r] * residuals[r]).sum();
        let mut left_sum = 0.0;
        let mut left_sq = 0.0;
        for split_at in 1..order.len() {
            let prev = samples[order[split_at - 1]].features.values[feature];
            let here = samples[order[split_at]].features.values[feature];
            left_sum += residuals[order[split_at - 1]];
            left_sq += residuals[order[split_at - 1]] * residuals[order[split_at - 1]];
            if here <= prev {
                continue; // same value, no valid threshold between
            }
            let threshold = prev + (here - prev) / 2.0;
            let left_n = split_at as f64;
            let right_n = (order.len() - split_at) as f64;
            let sse = sse_of(left_sum, left_sq, left_n)
                + sse_of(total_sum - left_sum, total_sq - left_sq, right_n);
            let better = match &best {
                None => true,
                Some(b) => {
                    sse < b.sse - 1e-12
                        || (sse <= b.sse + 1e-12
                            && (feature < b.feature
                                || (feature == b.feature && threshold < b.threshold)))
                }
            };
            if better {
                best = Some(SplitChoice { feature, threshold, sse });
            }
        }
    }
    best
}

/// Newton leaf value for logistic loss: `sum r / sum p (1 - p)`.
fn leaf_value(residuals: &[f64], probs: &[f64], rows: &[usize]) -> f64 {
    let num: f64 = rows.iter().map(|&r| residuals[r]).sum();
    let den: f64 = rows.iter().map(|&r| probs[r] * (1.0 - probs[r])).sum();
    num / den.max(1e-12)
}

fn grow_tree(
    samples: &[&LabeledSample],
    residuals: &[f64],
    probs: &[f64],
    max_depth: usize,
) -> RegressionTree {
    let mut tree = RegressionTree::default();
    let rows: Vec<usize> = (0..samples.len()).collect();
    grow_node(samples, residuals, probs, rows, max_depth, &mut tree);
    tree
}

fn grow_node(
    samples: &[&LabeledSample],
    residuals: &[f64],
    probs: &[f64],
    rows: Vec<usize>,
    depth_left: usize,
    tree: &mut RegressionTree,
) -> usize {
    let make_leaf = depth_left == 0 || rows.len() < 2;
    let split = if make_leaf {
        None
    } else {
        best_split(samples, residuals, &rows)
    };
    let idx = tree.nodes.len();
    match split {
        None => {
            tree.nodes.push(TreeNode {
                feature: 0,
                threshold: 0.0,
                left: 0,
                right: 0,
                value: leaf_value(residuals, probs, &rows),
                is_leaf: true,
            });
        }
        Some(choice) => {
            tree.nodes.push(TreeNode {
                feature: choice.feature,
                threshold: choice.threshold,
                left: 0,
                right: 0,
                value: 0.0,
                is_leaf: false,
            });
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                .into_iter()
                .partition(|&r| samples[r].features.values[choice.feature] <= choice.threshold);
            let left = grow_node(samples, residuals, probs, left_rows, depth_left - 1, tree);
            let right = grow_node(samples, residuals, probs, right_rows, depth_left - 1, tree);
            tree.nodes[idx].left = left;
            tree.nodes[idx].right = right;
        }
    }
    idx
}

fn logistic_loss(labels: &[f64], scores: &[f64]) -> f64 {
    let n = labels.len() as f64;
    labels
        .iter()
        .zip(scores)
        .map(|(&y, &z)| {
            // numerically stable log(1 + exp(-yz)) form
            let zy = if y > 0.5 { z } else { -z };
            if zy > 0.0 {
                (-zy).exp().ln_1p()
            } else {
                -zy + zy.exp().ln_1p()
            }
        })
        .sum::<f64>()
        / n
}

/// Fits a gradient-boosted tree classifier on a labeled dataset.
///
/// A constant-label dataset is not an error: the result is a constant
/// model with `single_class` set, flagged in the report as well.
pub fn train_gbt(
    dataset: &[LabeledSample],
    hyperparams: &GbtHyperparams,
) -> Result<(GbtModel, TrainReport), LearnError> {
    if dataset.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    let num_features = dataset[0].features.values.len();
    if dataset.iter().any(|s| s.features.values.len() != num_features) {
        return Err(LearnError::ConfigError("ragged feature vectors".into()));
    }
    let samples: Vec<&LabeledSample> = dataset.iter().collect();
    let labels: Vec<f64> = samples.iter().map(|s| if s.label { 1.0 } else { 0.0 }).collect();
    let positives = labels.iter().sum::<f64>();
    let n = labels.len() as f64;

    if positives == 0.0 || positives == n {
        // degenerate log odds, clamped so the sigmoid saturates cleanly
        let init = if positives == 0.0 { -50.0 } else { 50.0 };
        let model = GbtModel {
            schema_version: MODEL_SCHEMA_VERSION.to_string(),
            feature_schema: FEATURE_SCHEMA_VERSION.to_string(),
            hyperparams: *hyperparams,
            init_log_odds: init,
            trees: Vec::new(),
            single_class: true,
        };
        let report = TrainReport {
            per_iteration_loss: Vec::new(),
            single_class: true,
        };
        return Ok((model, report));
    }

    let base_rate = positives / n;
    let init = (base_rate / (1.0 - base_rate)).ln();
    let mut scores = vec![init; samples.len()];
    let mut trees = Vec::with_capacity(hyperparams.num_trees);
    let mut report = TrainReport::default();

    for _ in 0..hyperparams.num_trees {
        let probs: Vec<f64> = scores.iter().map(|&z| sigmoid(z)).collect();
        let residuals: Vec<f64> = labels.iter().zip(&probs).map(|(y, p)| y - p).collect();
        let tree = grow_tree(&samples, &residuals, &probs, hyperparams.max_depth);
        for (row, score) in scores.iter_mut().enumerate() {
            *score += hyperparams.learning_rate * tree.predict(&samples[row].features.values);
        }
        report.per_iteration_loss.push(logistic_loss(&labels, &scores));
        trees.push(tree);
    }

    let model = GbtModel {
        schema_version: MODEL_SCHEMA_VERSION.to_string(),
        feature_schema: FEATURE_SCHEMA_VERSION.to_string(),
        hyperparams: *hyperparams,
        init_log_odds: init,
        trees,
        single_class: false,
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;

    fn sample(values: Vec<f64>, label: bool) -> LabeledSample {
        LabeledSample {
            features: FeatureVector {
                values,
                row_index: 0,
                round: 1,
                instance_id: "toy".into(),
            },
            label,
        }
    }

    fn accuracy(model: &GbtModel, data: &[LabeledSample]) -> f64 {
        let correct = data
            .iter()
            .filter(|s| (model.predict_proba(&s.features.values) >= 0.5) == s.label)
            .count();
        correct as f64 / data.len() as f64
    }

    #[test]
    fn separable_data_fits_tightly() {
        // 200 points, label = (f0 + f1 > 1), trivially separable by trees
        let mut data = Vec::new();
        for i in 0..200 {
            let a = (i % 20) as f64 / 20.0;
            let b = (i / 20) as f64 / 10.0;
            data.push(sample(vec![a, b], a + b > 1.0));
        }
        let (model, report) = train_gbt(&data, &GbtHyperparams::default()).unwrap();
        assert!(!report.single_class);
        assert!(accuracy(&model, &data) >= 0.99);
    }

    #[test]
    fn xor_pattern_needs_depth() {
        let mut data = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                let a = i as f64 / 10.0;
                let b = j as f64 / 10.0;
                data.push(sample(vec![a, b], (a > 0.5) ^ (b > 0.5)));
            }
        }
        let (model, _) = train_gbt(&data, &GbtHyperparams::default()).unwrap();
        assert!(accuracy(&model, &data) >= 0.95);
    }

    #[test]
    fn constant_labels_give_constant_model() {
        let data: Vec<LabeledSample> =
            (0..10).map(|i| sample(vec![i as f64], true)).collect();
        let (model, report) = train_gbt(&data, &GbtHyperparams::default()).unwrap();
        assert!(report.single_class);
        assert!(model.single_class);
        assert!(model.predict_proba(&[123.0]) > 0.999);
    }

    #[test]
    fn training_loss_is_monotone() {
        let mut data = Vec::new();
        for i in 0..60 {
            data.push(sample(vec![(i % 7) as f64, (i % 3) as f64], i % 2 == 0));
        }
        let (_, report) = train_gbt(&data, &GbtHyperparams::default()).unwrap();
        for pair in report.per_iteration_loss.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "loss increased: {pair:?}");
        }
    }

    #[test]
    fn depth_is_bounded() {
        let mut data = Vec::new();
        for i in 0..128 {
            data.push(sample(vec![i as f64], i % 3 == 0));
        }
        let hp = GbtHyperparams {
            max_depth: 3,
            num_trees: 5,
            ..GbtHyperparams::default()
        };
        let (model, _) = train_gbt(&data, &hp).unwrap();
        for tree in &model.trees {
            assert!(tree.max_depth() <= 3);
        }
    }

    #[test]
    fn json_round_trip_is_bitwise() {
        let mut data = Vec::new();
        for i in 0..50 {
            data.push(sample(vec![(i % 5) as f64, (i % 4) as f64], i % 2 == 0));
        }
        let (model, _) = train_gbt(&data, &GbtHyperparams::default()).unwrap();
        let json = model.to_json();
        let loaded = GbtModel::from_json(&json).unwrap();
        assert_eq!(model, loaded);
        for s in &data {
            let a = model.predict_proba(&s.features.values);
            let b = loaded.predict_proba(&s.features.values);
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn empty_dataset_rejected() {
        assert!(matches!(
            train_gbt(&[], &GbtHyperparams::default()),
            Err(LearnError::EmptyDataset)
        ));
    }
}
