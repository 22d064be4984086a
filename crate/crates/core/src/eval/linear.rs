//! Multinomial logistic regression trained by full-batch gradient descent.
//!
//! Weights start at zero, so training is deterministic. The L2 penalty
//! skips the bias terms. Prediction takes the argmax score with ties going
//! to the smaller class index.

use crate::eval::classifier::{Classifier, TrainSettings};

pub struct LogisticRegression {
    /// One weight row per class: `width` feature weights then the bias.
    weights: Vec<Vec<f64>>,
    width: usize,
}

impl LogisticRegression {
    pub fn fit(
        features: &[Vec<f64>],
        labels: &[usize],
        n_classes: usize,
        settings: &TrainSettings,
    ) -> LogisticRegression {
        let n = features.len();
        let width = features[0].len();
        let mut weights = vec![vec![0.0; width + 1]; n_classes];
        let mut gradients = vec![vec![0.0; width + 1]; n_classes];
        for _ in 0..settings.linear_epochs {
            for g in gradients.iter_mut() {
                g.iter_mut().for_each(|v| *v = 0.0);
            }
            for (row, &label) in features.iter().zip(labels) {
                let probs = softmax(&scores(&weights, row));
                for (c, prob) in probs.iter().enumerate() {
                    let err = prob - if c == label { 1.0 } else { 0.0 };
                    for (g, &x) in gradients[c].iter_mut().zip(row) {
                        *g += err * x;
                    }
                    gradients[c][width] += err;
                }
            }
            for (w_row, g_row) in weights.iter_mut().zip(&gradients) {
                for (j, (w, g)) in w_row.iter_mut().zip(g_row).enumerate() {
                    let penalty = if j < width { settings.linear_l2 * *w } else { 0.0 };
                    *w -= settings.linear_rate * (g / n as f64 + penalty);
                }
            }
        }
        LogisticRegression { weights, width }
    }
}

impl Classifier for LogisticRegression {
    fn predict(&self, features: &[f64]) -> usize {
        debug_assert_eq!(features.len(), self.width);
        argmax(&scores(&self.weights, features))
    }
}

fn scores(weights: &[Vec<f64>], row: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .map(|w| {
            let mut s = w[row.len()];
            for (wi, xi) in w.iter().zip(row) {
                s += wi * xi;
            }
            s
        })
        .collect()
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|e| e / total).collect()
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
