//! Classifier registry.
//!
//! Four model families share one training entry point and one prediction
//! trait. Callers choose a family by kind (usually parsed from a CLI flag)
//! and get a boxed trait object back, so downstream evaluation code never
//! branches on the family.

use crate::error::{Error, Result};
use crate::eval::boosting::GradientBoosting;
use crate::eval::forest::RandomForest;
use crate::eval::linear::LogisticRegression;
use crate::eval::tree::ClassificationTree;

/// A trained model: maps a feature vector to a class index.
pub trait Classifier {
    fn predict(&self, features: &[f64]) -> usize;

    fn predict_batch(&self, rows: &[Vec<f64>]) -> Vec<usize> {
        rows.iter().map(|row| self.predict(row)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ClassifierKind {
    LogisticRegression,
    DecisionTree,
    RandomForest,
    GradientBoosting,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::LogisticRegression,
        ClassifierKind::DecisionTree,
        ClassifierKind::RandomForest,
        ClassifierKind::GradientBoosting,
    ];

    /// Short name used on the command line and in reports.
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::LogisticRegression => "lr",
            ClassifierKind::DecisionTree => "dt",
            ClassifierKind::RandomForest => "rf",
            ClassifierKind::GradientBoosting => "gbc",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" => Ok(ClassifierKind::LogisticRegression),
            "dt" => Ok(ClassifierKind::DecisionTree),
            "rf" => Ok(ClassifierKind::RandomForest),
            "gbc" => Ok(ClassifierKind::GradientBoosting),
            other => Err(Error::invalid(format!(
                "unknown classifier `{other}`; available: lr, dt, rf, gbc"
            ))),
        }
    }
}

/// Training hyperparameters. The defaults are what every report in this
/// crate uses; the seed only matters for the randomized families.
#[derive(Debug, Clone, Copy)]
pub struct TrainSettings {
    pub seed: u64,
    pub linear_rate: f64,
    pub linear_epochs: usize,
    pub linear_l2: f64,
    pub tree_max_depth: usize,
    pub tree_min_leaf: usize,
    pub forest_trees: usize,
    pub boost_stages: usize,
    pub boost_depth: usize,
    pub boost_rate: f64,
}

impl TrainSettings {
    pub fn new(seed: u64) -> TrainSettings {
        TrainSettings {
            seed,
            linear_rate: 0.1,
            linear_epochs: 500,
            linear_l2: 1e-4,
            tree_max_depth: 8,
            tree_min_leaf: 5,
            forest_trees: 100,
            boost_stages: 100,
            boost_depth: 3,
            boost_rate: 0.1,
        }
    }
}

/// Trains one classifier of the requested kind. Labels are class indices
/// in `0..n_classes`.
pub fn train_classifier(
    kind: ClassifierKind,
    features: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    settings: &TrainSettings,
) -> Result<Box<dyn Classifier>> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(Error::invalid(format!(
            "training needs matching non-empty features and labels ({} vs {})",
            features.len(),
            labels.len()
        )));
    }
    if n_classes < 2 {
        return Err(Error::invalid("training needs at least two classes"));
    }
    let width = features[0].len();
    if width == 0 || features.iter().any(|row| row.len() != width) {
        return Err(Error::invalid("training features must be non-empty and rectangular"));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::invalid(format!(
            "label index {bad} out of range for {n_classes} classes"
        )));
    }
    Ok(match kind {
        ClassifierKind::LogisticRegression => {
            Box::new(LogisticRegression::fit(features, labels, n_classes, settings))
        }
        ClassifierKind::DecisionTree => Box::new(ClassificationTree::fit(
            features,
            labels,
            n_classes,
            settings.tree_max_depth,
            settings.tree_min_leaf,
        )),
        ClassifierKind::RandomForest => {
            Box::new(RandomForest::fit(features, labels, n_classes, settings))
        }
        ClassifierKind::GradientBoosting => {
            Box::new(GradientBoosting::fit(features, labels, n_classes, settings))
        }
    })
}

/// Fraction of rows the classifier labels correctly.
pub fn accuracy(model: &dyn Classifier, features: &[Vec<f64>], labels: &[usize]) -> f64 {
    if features.is_empty() {
        return 0.0;
    }
    let hits = features
        .iter()
        .zip(labels)
        .filter(|(row, &label)| model.predict(row) == label)
        .count();
    hits as f64 / features.len() as f64
}
