//! Bagged ensemble of classification trees.
//!
//! Each tree trains on a bootstrap resample drawn from its own derived
//! stream, with a random feature subset of size ceil(sqrt(width)) at every
//! split. Votes break ties toward the smaller class index.

use rand::Rng;

use crate::eval::classifier::{Classifier, TrainSettings};
use crate::eval::tree::ClassificationTree;
use crate::rng::{self, label};

pub struct RandomForest {
    trees: Vec<ClassificationTree>,
    n_classes: usize,
}

impl RandomForest {
    pub fn fit(
        features: &[Vec<f64>],
        labels: &[usize],
        n_classes: usize,
        settings: &TrainSettings,
    ) -> RandomForest {
        let n = features.len();
        let width = features[0].len();
        let per_split = (width as f64).sqrt().ceil() as usize;
        let mut trees = Vec::with_capacity(settings.forest_trees);
        for t in 0..settings.forest_trees {
            let mut stream = rng::substream(settings.seed, &[label::TRAIN, t as u64]);
            let mut boot_features = Vec::with_capacity(n);
            let mut boot_labels = Vec::with_capacity(n);
            for _ in 0..n {
                let i = stream.random_range(0..n);
                boot_features.push(features[i].clone());
                boot_labels.push(labels[i]);
            }
            trees.push(ClassificationTree::fit_with_subsets(
                &boot_features,
                &boot_labels,
                n_classes,
                settings,
                &mut stream,
                per_split,
            ));
        }
        RandomForest { trees, n_classes }
    }
}

impl Classifier for RandomForest {
    fn predict(&self, features: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for tree in &self.trees {
            votes[tree.predict(features)] += 1;
        }
        let mut best = 0;
        for (c, &v) in votes.iter().enumerate().skip(1) {
            if v > votes[best] {
                best = c;
            }
        }
        best
    }
}
