//! Gradient-boosted classification.
//!
//! Multiclass boosting over the softmax log-loss. Every stage fits one
//! shallow regression tree per class to the loss gradients and takes a
//! Newton step in the leaves, damped by the learning rate. The per-stage
//! training loss is kept so callers can check the fit actually descended.

use crate::eval::classifier::{Classifier, TrainSettings};
use crate::eval::tree::RegressionTree;

pub struct GradientBoosting {
    stages: Vec<Vec<RegressionTree>>,
    rate: f64,
    n_classes: usize,
    /// Mean log-loss on the training set after each stage.
    pub training_loss: Vec<f64>,
}

impl GradientBoosting {
    pub fn fit(
        features: &[Vec<f64>],
        labels: &[usize],
        n_classes: usize,
        settings: &TrainSettings,
    ) -> GradientBoosting {
        let n = features.len();
        let mut scores = vec![vec![0.0f64; n_classes]; n];
        let mut stages = Vec::with_capacity(settings.boost_stages);
        let mut training_loss = Vec::with_capacity(settings.boost_stages);
        let mut residuals = vec![0.0f64; n];
        let mut hessians = vec![0.0f64; n];
        for _ in 0..settings.boost_stages {
            let probs: Vec<Vec<f64>> = scores.iter().map(|row| softmax_row(row)).collect();
            let mut stage = Vec::with_capacity(n_classes);
            for c in 0..n_classes {
                for i in 0..n {
                    let p = probs[i][c];
                    let y = if labels[i] == c { 1.0 } else { 0.0 };
                    residuals[i] = y - p;
                    hessians[i] = p * (1.0 - p);
                }
                let tree = RegressionTree::fit(
                    features,
                    &residuals,
                    &hessians,
                    settings.boost_depth,
                    settings.tree_min_leaf,
                );
                for (i, row) in features.iter().enumerate() {
                    scores[i][c] += settings.boost_rate * tree.predict(row);
                }
                stage.push(tree);
            }
            stages.push(stage);
            let loss: f64 = (0..n)
                .map(|i| -log_softmax(&scores[i], labels[i]))
                .sum::<f64>()
                / n as f64;
            training_loss.push(loss);
        }
        GradientBoosting {
            stages,
            rate: settings.boost_rate,
            n_classes,
            training_loss,
        }
    }
}

impl Classifier for GradientBoosting {
    fn predict(&self, features: &[f64]) -> usize {
        let mut scores = vec![0.0f64; self.n_classes];
        for stage in &self.stages {
            for (c, tree) in stage.iter().enumerate() {
                scores[c] += self.rate * tree.predict(features);
            }
        }
        let mut best = 0;
        for (c, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = c;
            }
        }
        best
    }
}

fn softmax_row(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

fn log_softmax(scores: &[f64], class: usize) -> f64 {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum: f64 = scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln() + max;
    scores[class] - log_sum
}
