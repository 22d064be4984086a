//! Train-on-synthetic, test-on-real utility scoring.
//!
//! For each requested classifier kind, two models are trained with the same
//! settings: one on real training rows, one on synthetic rows. Both are
//! scored on the same held-out real test set, so the accuracy gap isolates
//! what the synthesizer lost. A single feature encoder is fitted on the real
//! training split and reused everywhere; the label space is the union of
//! target categories seen in any of the three tables.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::dataset::{ColumnKind, Table, Value};
use crate::encode::FeatureEncoder;
use crate::error::{Error, Result};
use crate::eval::classifier::{accuracy, train_classifier, ClassifierKind, TrainSettings};

#[derive(Debug, Clone, Serialize)]
pub struct ClassifierScore {
    pub kind: String,
    pub accuracy_real: f64,
    pub accuracy_synthetic: f64,
    /// `accuracy_real - accuracy_synthetic`; positive means the synthetic
    /// table trains a worse model.
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct UtilityReport {
    pub target: String,
    pub n_train_real: usize,
    pub n_train_synthetic: usize,
    pub n_test: usize,
    /// Accuracy of always predicting the most frequent training class.
    pub majority_rate: f64,
    pub scores: Vec<ClassifierScore>,
}

pub fn tstr(
    real_train: &Table,
    synthetic: &Table,
    test: &Table,
    target: &str,
    kinds: &[ClassifierKind],
    settings: &TrainSettings,
) -> Result<UtilityReport> {
    let target_idx = real_train.schema.require(target)?;
    if real_train.schema.columns[target_idx].kind != ColumnKind::Discrete {
        return Err(Error::invalid(format!(
            "utility target `{target}` must be a discrete column"
        )));
    }
    if synthetic.schema != real_train.schema || test.schema != real_train.schema {
        return Err(Error::invalid(
            "utility evaluation needs identical schemas for real, synthetic and test tables",
        ));
    }
    if kinds.is_empty() {
        return Err(Error::invalid("utility evaluation needs at least one classifier kind"));
    }

    let mut classes: BTreeSet<String> = BTreeSet::new();
    for table in [real_train, synthetic, test] {
        for row in &table.rows {
            if let Value::Category(c) = &row[target_idx] {
                classes.insert(c.clone());
            }
        }
    }
    let classes: Vec<String> = classes.into_iter().collect();
    if classes.len() < 2 {
        return Err(Error::invalid(format!(
            "utility target `{target}` has fewer than two observed categories"
        )));
    }

    let encoder = FeatureEncoder::fit(&real_train.schema, real_train, &[target])?;
    let (real_x, real_y) = encode_labeled(&encoder, real_train, target_idx, &classes)?;
    let (synth_x, synth_y) = encode_labeled(&encoder, synthetic, target_idx, &classes)?;
    let (test_x, test_y) = encode_labeled(&encoder, test, target_idx, &classes)?;
    if test_x.is_empty() {
        return Err(Error::invalid("utility test split has no rows with a target value"));
    }

    let mut counts = vec![0usize; classes.len()];
    for &y in &real_y {
        counts[y] += 1;
    }
    let mut majority = 0;
    for (c, &count) in counts.iter().enumerate().skip(1) {
        if count > counts[majority] {
            majority = c;
        }
    }
    let majority_rate =
        test_y.iter().filter(|&&y| y == majority).count() as f64 / test_y.len() as f64;

    let mut scores = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let real_model = train_classifier(kind, &real_x, &real_y, classes.len(), settings)?;
        let synth_model = train_classifier(kind, &synth_x, &synth_y, classes.len(), settings)?;
        let accuracy_real = accuracy(real_model.as_ref(), &test_x, &test_y);
        let accuracy_synthetic = accuracy(synth_model.as_ref(), &test_x, &test_y);
        scores.push(ClassifierScore {
            kind: kind.name().to_string(),
            accuracy_real,
            accuracy_synthetic,
            delta: accuracy_real - accuracy_synthetic,
        });
    }

    Ok(UtilityReport {
        target: target.to_string(),
        n_train_real: real_x.len(),
        n_train_synthetic: synth_x.len(),
        n_test: test_x.len(),
        majority_rate,
        scores,
    })
}

/// Encodes every row whose target cell is present; rows with a missing
/// target carry no label and are skipped.
fn encode_labeled(
    encoder: &FeatureEncoder,
    table: &Table,
    target_idx: usize,
    classes: &[String],
) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for row in &table.rows {
        let Value::Category(c) = &row[target_idx] else {
            continue;
        };
        let label = classes
            .iter()
            .position(|k| k == c)
            .expect("class list is the union over all tables");
        features.push(encoder.encode_row(row)?);
        labels.push(label);
    }
    Ok((features, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Column, Schema};
    use rand::{Rng, SeedableRng};
    use crate::rng::RngStream;

    fn labeled_table(n: usize, seed: u64) -> Table {
        let schema = Schema::new(vec![
            Column { name: "x".into(), kind: ColumnKind::Continuous, tags: vec![] },
            Column { name: "y".into(), kind: ColumnKind::Continuous, tags: vec![] },
            Column { name: "side".into(), kind: ColumnKind::Discrete, tags: vec![] },
        ])
        .unwrap();
        let mut rng = RngStream::seed_from_u64(seed);
        let rows = (0..n)
            .map(|_| {
                let x: f64 = rng.random_range(-1.0..1.0);
                let y: f64 = rng.random_range(-1.0..1.0);
                let side = if x + 0.1 * y > 0.0 { "pos" } else { "neg" };
                vec![
                    Value::Number(x),
                    Value::Number(y),
                    Value::Category(side.to_string()),
                ]
            })
            .collect();
        Table::new(schema, rows).unwrap()
    }

    const KINDS: [ClassifierKind; 2] =
        [ClassifierKind::LogisticRegression, ClassifierKind::DecisionTree];

    #[test]
    fn synthetic_copy_of_real_scores_a_zero_delta() {
        let train = labeled_table(200, 1);
        let test = labeled_table(100, 2);
        let report = tstr(&train, &train.clone(), &test, "side", &KINDS, &TrainSettings::new(3))
            .unwrap();
        assert_eq!(report.n_train_real, 200);
        assert_eq!(report.n_train_synthetic, 200);
        assert_eq!(report.n_test, 100);
        for score in &report.scores {
            assert!(score.accuracy_real >= 0.9, "{} too weak", score.kind);
            assert_eq!(score.delta, 0.0);
            assert_eq!(score.accuracy_real, score.accuracy_synthetic);
        }
    }

    #[test]
    fn shuffled_labels_drop_synthetic_accuracy_toward_chance() {
        let train = labeled_table(300, 4);
        let test = labeled_table(150, 5);
        let mut shuffled = train.clone();
        let n = shuffled.rows.len();
        let moved: Vec<Value> = (0..n)
            .map(|i| shuffled.rows[(i + n / 2) % n][2].clone())
            .collect();
        for (row, label) in shuffled.rows.iter_mut().zip(moved) {
            row[2] = label;
        }
        let report =
            tstr(&train, &shuffled, &test, "side", &KINDS, &TrainSettings::new(3)).unwrap();
        for score in &report.scores {
            assert!(score.accuracy_real >= 0.9);
            assert!(
                score.accuracy_synthetic <= report.majority_rate + 0.15,
                "{}: {} vs majority {}",
                score.kind,
                score.accuracy_synthetic,
                report.majority_rate
            );
        }
    }

    #[test]
    fn rows_with_a_missing_target_are_skipped() {
        let train = labeled_table(120, 6);
        let mut test = labeled_table(60, 7);
        for row in test.rows.iter_mut().take(10) {
            row[2] = Value::Missing;
        }
        let report =
            tstr(&train, &train.clone(), &test, "side", &KINDS, &TrainSettings::new(3)).unwrap();
        assert_eq!(report.n_test, 50);
    }

    #[test]
    fn rejects_a_continuous_target() {
        let train = labeled_table(50, 8);
        let err = tstr(&train, &train.clone(), &train.clone(), "x", &KINDS, &TrainSettings::new(3));
        assert!(err.is_err());
    }

    #[test]
    fn rejects_mismatched_schemas() {
        let train = labeled_table(50, 9);
        let schema = Schema::new(vec![Column {
            name: "other".into(),
            kind: ColumnKind::Discrete,
            tags: vec![],
        }])
        .unwrap();
        let alien = Table::new(schema, vec![]).unwrap();
        let err = tstr(&train, &alien, &train.clone(), "side", &KINDS, &TrainSettings::new(3));
        assert!(err.is_err());
    }

    #[test]
    fn majority_rate_reflects_the_dominant_class() {
        let train = labeled_table(200, 10);
        let test = labeled_table(100, 11);
        let report =
            tstr(&train, &train.clone(), &test, "side", &KINDS, &TrainSettings::new(3)).unwrap();
        let pos = test
            .rows
            .iter()
            .filter(|r| r[2].as_category() == Some("pos"))
            .count() as f64
            / 100.0;
        assert!(report.majority_rate == pos || report.majority_rate == 1.0 - pos);
    }
}
