//! CART-style decision trees.
//!
//! The classification tree splits on Gini impurity, the regression tree on
//! squared error with Newton leaf values (used as the boosting base
//! learner). Both are deterministic: candidate features are scanned in
//! ascending index order, thresholds in ascending value order, and only a
//! strictly better score replaces the incumbent, so ties resolve to the
//! smallest feature index and threshold.

use rand::Rng;

use crate::eval::classifier::{Classifier, TrainSettings};
use crate::rng::RngStream;

enum ClassNode {
    Leaf(usize),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<ClassNode>,
        right: Box<ClassNode>,
    },
}

pub struct ClassificationTree {
    root: ClassNode,
}

impl ClassificationTree {
    pub fn fit(
        features: &[Vec<f64>],
        labels: &[usize],
        n_classes: usize,
        max_depth: usize,
        min_leaf: usize,
    ) -> ClassificationTree {
        let idx: Vec<usize> = (0..features.len()).collect();
        let root = build_class_node(
            features, labels, n_classes, &idx, max_depth, min_leaf, &mut None,
        );
        ClassificationTree { root }
    }

    /// Tree for ensemble use: every split sees only `per_split` features,
    /// drawn from the stream.
    pub fn fit_with_subsets(
        features: &[Vec<f64>],
        labels: &[usize],
        n_classes: usize,
        settings: &TrainSettings,
        rng: &mut RngStream,
        per_split: usize,
    ) -> ClassificationTree {
        let idx: Vec<usize> = (0..features.len()).collect();
        let mut sampler = Some((rng, per_split));
        let root = build_class_node(
            features,
            labels,
            n_classes,
            &idx,
            settings.tree_max_depth,
            settings.tree_min_leaf,
            &mut sampler,
        );
        ClassificationTree { root }
    }

    #[cfg(test)]
    pub(crate) fn root_split(&self) -> Option<(usize, f64)> {
        match &self.root {
            ClassNode::Leaf(_) => None,
            ClassNode::Split {
                feature, threshold, ..
            } => Some((*feature, *threshold)),
        }
    }
}

impl Classifier for ClassificationTree {
    fn predict(&self, features: &[f64]) -> usize {
        let mut node = &self.root;
        loop {
            match node {
                ClassNode::Leaf(label) => return *label,
                ClassNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if features[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }
}

type FeatureSampler<'a> = Option<(&'a mut RngStream, usize)>;

fn build_class_node(
    features: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    idx: &[usize],
    depth_left: usize,
    min_leaf: usize,
    sampler: &mut FeatureSampler,
) -> ClassNode {
    let counts = class_counts(labels, idx, n_classes);
    let majority = majority_class(&counts);
    let parent_gini = gini(&counts, idx.len());
    if depth_left == 0 || parent_gini == 0.0 || idx.len() < 2 * min_leaf {
        return ClassNode::Leaf(majority);
    }
    let width = features[0].len();
    let candidates = candidate_features(width, sampler);
    let Some((feature, threshold, score)) =
        best_class_split(features, labels, n_classes, idx, &candidates, min_leaf)
    else {
        return ClassNode::Leaf(majority);
    };
    if score >= parent_gini - 1e-12 {
        return ClassNode::Leaf(majority);
    }
    let (left_idx, right_idx) = partition(features, idx, feature, threshold);
    let left = build_class_node(
        features, labels, n_classes, &left_idx, depth_left - 1, min_leaf, sampler,
    );
    let right = build_class_node(
        features, labels, n_classes, &right_idx, depth_left - 1, min_leaf, sampler,
    );
    ClassNode::Split {
        feature,
        threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

fn candidate_features(width: usize, sampler: &mut FeatureSampler) -> Vec<usize> {
    match sampler {
        None => (0..width).collect(),
        Some((rng, per_split)) => {
            // Partial Fisher-Yates, then sorted so the scan order (and with
            // it the tie-break) stays by feature index.
            let mut pool: Vec<usize> = (0..width).collect();
            let m = (*per_split).min(width);
            for i in 0..m {
                let j = rng.random_range(i..width);
                pool.swap(i, j);
            }
            let mut chosen = pool[..m].to_vec();
            chosen.sort_unstable();
            chosen
        }
    }
}

fn best_class_split(
    features: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    idx: &[usize],
    candidates: &[usize],
    min_leaf: usize,
) -> Option<(usize, f64, f64)> {
    let n = idx.len();
    let mut best: Option<(usize, f64, f64)> = None;
    for &f in candidates {
        let mut pairs: Vec<(f64, usize)> = idx
            .iter()
            .map(|&i| (features[i][f], labels[i]))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut left = vec![0usize; n_classes];
        let mut right = vec![0usize; n_classes];
        for &(_, label) in &pairs {
            right[label] += 1;
        }
        for k in 0..n - 1 {
            left[pairs[k].1] += 1;
            right[pairs[k].1] -= 1;
            if pairs[k].0 == pairs[k + 1].0 {
                continue;
            }
            let ln = k + 1;
            let rn = n - ln;
            if ln < min_leaf || rn < min_leaf {
                continue;
            }
            let score =
                (ln as f64 * gini(&left, ln) + rn as f64 * gini(&right, rn)) / n as f64;
            if best.map_or(true, |(_, _, s)| score < s - 1e-12) {
                best = Some((f, split_threshold(pairs[k].0, pairs[k + 1].0), score));
            }
        }
    }
    best
}

/// Midpoint between neighbors, falling back to the left value when rounding
/// would cross into the right group (`<=` routes rows left).
fn split_threshold(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}

fn partition(
    features: &[Vec<f64>],
    idx: &[usize],
    feature: usize,
    threshold: f64,
) -> (Vec<usize>, Vec<usize>) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for &i in idx {
        if features[i][feature] <= threshold {
            left.push(i);
        } else {
            right.push(i);
        }
    }
    (left, right)
}

fn class_counts(labels: &[usize], idx: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0usize; n_classes];
    for &i in idx {
        counts[labels[i]] += 1;
    }
    counts
}

fn majority_class(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &count) in counts.iter().enumerate().skip(1) {
        if count > counts[best] {
            best = c;
        }
    }
    best
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut sum_sq = 0.0;
    for &c in counts {
        let p = c as f64 / n as f64;
        sum_sq += p * p;
    }
    1.0 - sum_sq
}

enum RegNode {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<RegNode>,
        right: Box<RegNode>,
    },
}

/// Squared-error regression tree. Leaf values are one Newton step for the
/// boosting objective: sum of residuals over sum of hessians.
pub(crate) struct RegressionTree {
    root: RegNode,
}

impl RegressionTree {
    pub(crate) fn fit(
        features: &[Vec<f64>],
        residuals: &[f64],
        hessians: &[f64],
        max_depth: usize,
        min_leaf: usize,
    ) -> RegressionTree {
        let idx: Vec<usize> = (0..features.len()).collect();
        let root = build_reg_node(features, residuals, hessians, &idx, max_depth, min_leaf);
        RegressionTree { root }
    }

    pub(crate) fn predict(&self, features: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                RegNode::Leaf(value) => return *value,
                RegNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if features[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }
}

fn newton_leaf(residuals: &[f64], hessians: &[f64], idx: &[usize]) -> f64 {
    let num: f64 = idx.iter().map(|&i| residuals[i]).sum();
    let den: f64 = idx.iter().map(|&i| hessians[i]).sum();
    num / den.max(1e-12)
}

fn build_reg_node(
    features: &[Vec<f64>],
    residuals: &[f64],
    hessians: &[f64],
    idx: &[usize],
    depth_left: usize,
    min_leaf: usize,
) -> RegNode {
    if depth_left == 0 || idx.len() < 2 * min_leaf {
        return RegNode::Leaf(newton_leaf(residuals, hessians, idx));
    }
    let parent_sse = sse(residuals, idx);
    let width = features[0].len();
    let candidates: Vec<usize> = (0..width).collect();
    let Some((feature, threshold, score)) =
        best_reg_split(features, residuals, idx, &candidates, min_leaf)
    else {
        return RegNode::Leaf(newton_leaf(residuals, hessians, idx));
    };
    if score >= parent_sse - 1e-12 {
        return RegNode::Leaf(newton_leaf(residuals, hessians, idx));
    }
    let (left_idx, right_idx) = partition(features, idx, feature, threshold);
    RegNode::Split {
        feature,
        threshold,
        left: Box::new(build_reg_node(
            features, residuals, hessians, &left_idx, depth_left - 1, min_leaf,
        )),
        right: Box::new(build_reg_node(
            features, residuals, hessians, &right_idx, depth_left - 1, min_leaf,
        )),
    }
}

fn sse(values: &[f64], idx: &[usize]) -> f64 {
    let n = idx.len() as f64;
    let sum: f64 = idx.iter().map(|&i| values[i]).sum();
    let sq: f64 = idx.iter().map(|&i| values[i] * values[i]).sum();
    (sq - sum * sum / n).max(0.0)
}

fn best_reg_split(
    features: &[Vec<f64>],
    residuals: &[f64],
    idx: &[usize],
    candidates: &[usize],
    min_leaf: usize,
) -> Option<(usize, f64, f64)> {
    let n = idx.len();
    let total_sum: f64 = idx.iter().map(|&i| residuals[i]).sum();
    let total_sq: f64 = idx.iter().map(|&i| residuals[i] * residuals[i]).sum();
    let mut best: Option<(usize, f64, f64)> = None;
    for &f in candidates {
        let mut pairs: Vec<(f64, f64)> = idx
            .iter()
            .map(|&i| (features[i][f], residuals[i]))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut left_sum = 0.0;
        let mut left_sq = 0.0;
        for k in 0..n - 1 {
            left_sum += pairs[k].1;
            left_sq += pairs[k].1 * pairs[k].1;
            if pairs[k].0 == pairs[k + 1].0 {
                continue;
            }
            let ln = (k + 1) as f64;
            let rn = (n - k - 1) as f64;
            if ((k + 1) < min_leaf) || ((n - k - 1) < min_leaf) {
                continue;
            }
            let right_sum = total_sum - left_sum;
            let right_sq = total_sq - left_sq;
            let score = (left_sq - left_sum * left_sum / ln).max(0.0)
                + (right_sq - right_sum * right_sum / rn).max(0.0);
            if best.map_or(true, |(_, _, s)| score < s - 1e-12) {
                best = Some((f, split_threshold(pairs[k].0, pairs[k + 1].0), score));
            }
        }
    }
    best
}
