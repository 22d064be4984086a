//! Privacy attacks run against a released synthetic table.
//!
//! Attribute inference trains a classifier on the synthetic rows using only
//! the attacker's known columns, then measures how often it recovers the
//! hidden attribute on the real rows. Re-identification links each
//! synthetic row to its nearest real row over quasi-identifier columns and
//! counts how often every sensitive attribute is disclosed by the match.

use rand::Rng;
use serde::Serialize;

use crate::dataset::{mean_std, ColumnKind, Table, Value};
use crate::encode::FeatureEncoder;
use crate::error::{Error, Result};
use crate::eval::classifier::{accuracy, train_classifier, ClassifierKind, TrainSettings};
use crate::rng::{self, label};

#[derive(Debug, Clone, Serialize)]
pub struct InferenceReport {
    pub target: String,
    pub known: Vec<String>,
    pub classifier: String,
    /// Fraction of real rows whose hidden attribute the attack recovers.
    pub accuracy: f64,
    /// Frequency of the most common target category among the evaluated
    /// real rows; guessing it needs no synthetic data at all.
    pub baseline_majority_rate: f64,
    pub n_eval: usize,
}

/// Number of random pairings averaged for the re-identification baseline.
const BASELINE_REPS: u64 = 100;

#[derive(Debug, Clone, Serialize)]
pub struct ReidentificationReport {
    pub quasi_identifiers: Vec<String>,
    pub sensitive: Vec<String>,
    /// Fraction of synthetic rows whose nearest real row agrees on every
    /// sensitive attribute.
    pub success_rate: f64,
    /// Same measure with the nearest-neighbour link replaced by a random
    /// one, averaged over repeated pairings.
    pub baseline_rate: f64,
    pub n: usize,
    /// Continuous sensitive values count as disclosed when within
    /// `delta` real standard deviations of the linked row.
    pub delta: f64,
}

pub fn attribute_inference_attack(
    synthetic: &Table,
    real: &Table,
    target: &str,
    known: &[String],
    kind: ClassifierKind,
    settings: &TrainSettings,
) -> Result<InferenceReport> {
    let target_idx = real.schema.require(target)?;
    if real.schema.columns[target_idx].kind != ColumnKind::Discrete {
        return Err(Error::invalid(format!(
            "inference target `{target}` must be a discrete column"
        )));
    }
    if synthetic.schema != real.schema {
        return Err(Error::invalid("attack needs identical real and synthetic schemas"));
    }
    if known.is_empty() {
        return Err(Error::invalid("attribute inference needs at least one known column"));
    }
    for name in known {
        real.schema.require(name)?;
        if name == target {
            return Err(Error::invalid(format!(
                "known column `{name}` is the attack target"
            )));
        }
    }

    // The attacker only observes the known columns, so everything else is
    // excluded from the feature encoding.
    let hidden: Vec<&str> = real
        .schema
        .columns
        .iter()
        .map(|c| c.name.as_str())
        .filter(|name| !known.iter().any(|k| k == name))
        .collect();
    let encoder = FeatureEncoder::fit(&synthetic.schema, synthetic, &hidden)?;

    let mut classes: Vec<String> = Vec::new();
    for table in [synthetic, real] {
        for row in &table.rows {
            if let Value::Category(c) = &row[target_idx] {
                if !classes.contains(c) {
                    classes.push(c.clone());
                }
            }
        }
    }
    classes.sort();
    if classes.len() < 2 {
        return Err(Error::invalid(format!(
            "inference target `{target}` has fewer than two observed categories"
        )));
    }

    let (train_x, train_y) = encode_labeled(&encoder, synthetic, target_idx, &classes)?;
    let (eval_x, eval_y) = encode_labeled(&encoder, real, target_idx, &classes)?;
    if train_x.is_empty() || eval_x.is_empty() {
        return Err(Error::invalid("attack needs target values in both tables"));
    }

    let model = train_classifier(kind, &train_x, &train_y, classes.len(), settings)?;
    let mut counts = vec![0usize; classes.len()];
    for &y in &eval_y {
        counts[y] += 1;
    }
    let baseline = counts.iter().max().copied().unwrap_or(0) as f64 / eval_y.len() as f64;

    Ok(InferenceReport {
        target: target.to_string(),
        known: known.to_vec(),
        classifier: kind.name().to_string(),
        accuracy: accuracy(model.as_ref(), &eval_x, &eval_y),
        baseline_majority_rate: baseline,
        n_eval: eval_y.len(),
    })
}

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
            .expect("class list is the union over both tables");
        features.push(encoder.encode_row(row)?);
        labels.push(label);
    }
    Ok((features, labels))
}

pub fn reidentification_attack(
    synthetic: &Table,
    real: &Table,
    quasi_identifiers: &[String],
    sensitive: &[String],
    delta: f64,
    seed: u64,
) -> Result<ReidentificationReport> {
    if synthetic.schema != real.schema {
        return Err(Error::invalid("attack needs identical real and synthetic schemas"));
    }
    if quasi_identifiers.is_empty() || sensitive.is_empty() {
        return Err(Error::invalid(
            "re-identification needs quasi-identifier and sensitive column lists",
        ));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::invalid("re-identification delta must be finite and non-negative"));
    }
    if real.rows.is_empty() || synthetic.rows.is_empty() {
        return Err(Error::invalid("re-identification needs non-empty tables"));
    }
    let qi: Vec<usize> = quasi_identifiers
        .iter()
        .map(|name| real.schema.require(name))
        .collect::<Result<_>>()?;
    let sens: Vec<usize> = sensitive
        .iter()
        .map(|name| real.schema.require(name))
        .collect::<Result<_>>()?;

    // Continuous columns are compared on the real table's scale so that no
    // single wide column dominates the neighbour search.
    let scales: Vec<Option<(f64, f64)>> = real
        .schema
        .columns
        .iter()
        .enumerate()
        .map(|(idx, column)| match column.kind {
            ColumnKind::Discrete => None,
            ColumnKind::Continuous => {
                let values = real.continuous_values(idx);
                let (mean, std) = mean_std(&values);
                let scale = if std.is_finite() && std > 0.0 { std } else { 1.0 };
                Some((mean, scale))
            }
        })
        .collect();

    let n = synthetic.rows.len();
    let mut successes = 0usize;
    for synth_row in &synthetic.rows {
        let mut best = 0usize;
        let mut best_dist = f64::INFINITY;
        for (i, real_row) in real.rows.iter().enumerate() {
            let d = qi_distance(synth_row, real_row, &qi, &scales);
            if d < best_dist {
                best_dist = d;
                best = i;
            }
        }
        if disclosed(synth_row, &real.rows[best], &sens, &scales, delta) {
            successes += 1;
        }
    }

    let mut baseline_sum = 0.0;
    for rep in 0..BASELINE_REPS {
        let mut stream = rng::substream(seed, &[label::ATTACK, rep]);
        let hits = synthetic
            .rows
            .iter()
            .filter(|synth_row| {
                let pick = stream.random_range(0..real.rows.len());
                disclosed(synth_row, &real.rows[pick], &sens, &scales, delta)
            })
            .count();
        baseline_sum += hits as f64 / n as f64;
    }

    Ok(ReidentificationReport {
        quasi_identifiers: quasi_identifiers.to_vec(),
        sensitive: sensitive.to_vec(),
        success_rate: successes as f64 / n as f64,
        baseline_rate: baseline_sum / BASELINE_REPS as f64,
        n,
        delta,
    })
}

/// Distance over quasi-identifiers: squared scaled difference for
/// continuous cells, zero/one for discrete cells, one when either side is
/// missing. Ties resolve to the lowest real row index via strict `<`.
fn qi_distance(
    synth_row: &[Value],
    real_row: &[Value],
    qi: &[usize],
    scales: &[Option<(f64, f64)>],
) -> f64 {
    let mut total = 0.0;
    for &c in qi {
        total += match (&synth_row[c], &real_row[c]) {
            (Value::Number(a), Value::Number(b)) => {
                let (_, scale) = scales[c].expect("continuous column has a scale");
                let d = (a - b) / scale;
                d * d
            }
            (Value::Category(a), Value::Category(b)) => {
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
            _ => 1.0,
        };
    }
    total
}

fn disclosed(
    synth_row: &[Value],
    real_row: &[Value],
    sensitive: &[usize],
    scales: &[Option<(f64, f64)>],
    delta: f64,
) -> bool {
    sensitive.iter().all(|&c| match (&synth_row[c], &real_row[c]) {
        (Value::Category(a), Value::Category(b)) => a == b,
        (Value::Number(a), Value::Number(b)) => {
            let (_, scale) = scales[c].expect("continuous column has a scale");
            (a - b).abs() <= delta * scale
        }
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Column, Schema};
    use rand::SeedableRng;
    use crate::rng::RngStream;

    fn linked_table(n: usize, seed: u64) -> Table {
        let schema = Schema::new(vec![
            Column { name: "a".into(), kind: ColumnKind::Continuous, tags: vec![] },
            Column { name: "b".into(), kind: ColumnKind::Continuous, tags: vec![] },
            Column { name: "group".into(), kind: ColumnKind::Discrete, tags: vec![] },
            Column { name: "secret".into(), kind: ColumnKind::Discrete, tags: vec![] },
        ])
        .unwrap();
        let mut rng = RngStream::seed_from_u64(seed);
        let rows = (0..n)
            .map(|_| {
                let a: f64 = rng.random_range(-1.0..1.0);
                let b: f64 = rng.random_range(-1.0..1.0);
                let group = if a > 0.0 { "east" } else { "west" };
                let secret = if a + b > 0.0 { "yes" } else { "no" };
                vec![
                    Value::Number(a),
                    Value::Number(b),
                    Value::Category(group.to_string()),
                    Value::Category(secret.to_string()),
                ]
            })
            .collect();
        Table::new(schema, rows).unwrap()
    }

    fn known() -> Vec<String> {
        vec!["a".to_string(), "b".to_string()]
    }

    #[test]
    fn leaky_synthetic_data_enables_inference() {
        let real = linked_table(300, 1);
        let report = attribute_inference_attack(
            &real.clone(),
            &real,
            "secret",
            &known(),
            ClassifierKind::DecisionTree,
            &TrainSettings::new(2),
        )
        .unwrap();
        assert!(report.accuracy >= 0.9);
        assert!(report.accuracy > report.baseline_majority_rate + 0.2);
        assert_eq!(report.n_eval, 300);
    }

    #[test]
    fn unrelated_synthetic_data_stays_near_the_baseline() {
        let real = linked_table(300, 3);
        let mut scrambled = linked_table(300, 4);
        // Break the link between the known columns and the secret.
        let n = scrambled.rows.len();
        let moved: Vec<Value> = (0..n)
            .map(|i| scrambled.rows[(i + n / 2) % n][3].clone())
            .collect();
        for (row, secret) in scrambled.rows.iter_mut().zip(moved) {
            row[3] = secret;
        }
        let report = attribute_inference_attack(
            &scrambled,
            &real,
            "secret",
            &known(),
            ClassifierKind::DecisionTree,
            &TrainSettings::new(2),
        )
        .unwrap();
        assert!(report.accuracy <= report.baseline_majority_rate + 0.15);
    }

    #[test]
    fn rejects_the_target_among_known_columns() {
        let real = linked_table(50, 5);
        let err = attribute_inference_attack(
            &real.clone(),
            &real,
            "secret",
            &["secret".to_string()],
            ClassifierKind::DecisionTree,
            &TrainSettings::new(2),
        );
        assert!(err.is_err());
    }

    fn qi() -> Vec<String> {
        vec!["a".to_string(), "b".to_string(), "group".to_string()]
    }

    fn secrets() -> Vec<String> {
        vec!["secret".to_string()]
    }

    #[test]
    fn released_copies_are_fully_reidentified() {
        let real = linked_table(200, 6);
        let report =
            reidentification_attack(&real.clone(), &real, &qi(), &secrets(), 0.25, 11).unwrap();
        assert_eq!(report.success_rate, 1.0);
        assert!(report.baseline_rate < 0.85);
        assert_eq!(report.n, 200);
    }

    #[test]
    fn independent_synthetic_rows_stay_near_the_baseline() {
        let real = linked_table(200, 7);
        // Same generating process, fresh draws: the neighbour link carries
        // some signal because the secret is a function of the identifiers,
        // but nothing row-specific.
        let synth = linked_table(200, 8);
        let report = reidentification_attack(&synth, &real, &qi(), &secrets(), 0.25, 11).unwrap();
        assert!(report.success_rate < 1.0);
        assert!(report.baseline_rate > 0.0);
    }

    #[test]
    fn same_seed_means_the_same_baseline() {
        let real = linked_table(100, 9);
        let synth = linked_table(100, 10);
        let a = reidentification_attack(&synth, &real, &qi(), &secrets(), 0.25, 13).unwrap();
        let b = reidentification_attack(&synth, &real, &qi(), &secrets(), 0.25, 13).unwrap();
        assert_eq!(a.success_rate, b.success_rate);
        assert_eq!(a.baseline_rate, b.baseline_rate);
    }

    #[test]
    fn missing_cells_never_count_as_disclosure() {
        let real = linked_table(50, 12);
        let mut synth = real.clone();
        for row in synth.rows.iter_mut() {
            row[3] = Value::Missing;
        }
        let report = reidentification_attack(&synth, &real, &qi(), &secrets(), 0.25, 14).unwrap();
        assert_eq!(report.success_rate, 0.0);
    }

    #[test]
    fn rejects_unknown_columns() {
        let real = linked_table(20, 15);
        let err = reidentification_attack(
            &real.clone(),
            &real,
            &["nope".to_string()],
            &secrets(),
            0.25,
            16,
        );
        assert!(err.is_err());
    }
}
