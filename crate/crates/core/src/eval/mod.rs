//! Utility and privacy evaluation: classifiers trained from scratch, the
//! train-on-synthetic/test-on-real loop, and attack simulations.

pub mod attack;
pub mod boosting;
pub mod classifier;
pub mod forest;
pub mod linear;
pub mod tree;
pub mod tstr;

pub use attack::{
    attribute_inference_attack, reidentification_attack, InferenceReport, ReidentificationReport,
};
pub use classifier::{accuracy, train_classifier, Classifier, ClassifierKind, TrainSettings};
pub use tstr::{tstr, ClassifierScore, UtilityReport};
