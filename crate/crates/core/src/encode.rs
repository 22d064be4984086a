//! Numeric feature encoding shared by the classifiers and the projection
//! code. Continuous columns are z-scored with statistics frozen at fit
//! time; discrete columns become one-hot blocks over the categories seen at
//! fit time, in sorted order. Missing values and unseen categories encode
//! to all zeros, which after z-scoring means "at the training mean".

use std::collections::BTreeMap;

use crate::dataset::{ColumnKind, Schema, Table, Value};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
enum ColumnEncoder {
    /// Z-score with frozen mean and scale. A constant column gets scale 1
    /// so it encodes to exactly zero instead of dividing by zero.
    Continuous { mean: f64, scale: f64 },
    /// One category per slot, sorted. Unseen categories map to all zeros.
    Discrete { slots: BTreeMap<String, usize>, width: usize },
}

/// Fixed-width row encoder fitted on one table.
#[derive(Debug, Clone)]
pub struct FeatureEncoder {
    schema: Schema,
    columns: Vec<Option<ColumnEncoder>>,
    width: usize,
}

impl FeatureEncoder {
    /// Fits an encoder over all schema columns except `exclude` (typically
    /// the prediction target). Encoding statistics come from `table` only.
    pub fn fit(schema: &Schema, table: &Table, exclude: &[&str]) -> Result<FeatureEncoder> {
        if table.schema != *schema {
            return Err(Error::invalid("encoder: table schema mismatch"));
        }
        let mut columns = Vec::with_capacity(schema.columns.len());
        let mut width = 0;
        for (idx, column) in schema.columns.iter().enumerate() {
            if exclude.contains(&column.name.as_str()) {
                columns.push(None);
                continue;
            }
            let encoder = match column.kind {
                ColumnKind::Continuous => {
                    let values: Vec<f64> = table
                        .rows
                        .iter()
                        .filter_map(|row| row[idx].as_number())
                        .collect();
                    let (mean, std) = crate::dataset::mean_std(&values);
                    let scale = if std > 0.0 { std } else { 1.0 };
                    width += 1;
                    ColumnEncoder::Continuous { mean, scale }
                }
                ColumnKind::Discrete => {
                    let mut categories: Vec<String> = table
                        .rows
                        .iter()
                        .filter_map(|row| row[idx].as_category().map(str::to_string))
                        .collect();
                    categories.sort();
                    categories.dedup();
                    let slots: BTreeMap<String, usize> = categories
                        .into_iter()
                        .enumerate()
                        .map(|(slot, cat)| (cat, width + slot))
                        .collect();
                    let block = slots.len();
                    width += block;
                    ColumnEncoder::Discrete { slots, width: block }
                }
            };
            columns.push(Some(encoder));
        }
        if width == 0 {
            return Err(Error::invalid("encoder: no feature columns left"));
        }
        Ok(FeatureEncoder {
            schema: schema.clone(),
            columns,
            width,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Encodes one row into a dense feature vector.
    pub fn encode_row(&self, row: &[Value]) -> Result<Vec<f64>> {
        if row.len() != self.schema.columns.len() {
            return Err(Error::invalid(format!(
                "encoder: row has {} cells, schema has {} columns",
                row.len(),
                self.schema.columns.len()
            )));
        }
        let mut features = vec![0.0; self.width];
        let mut offset = 0;
        for (value, encoder) in row.iter().zip(&self.columns) {
            let Some(encoder) = encoder else { continue };
            match encoder {
                ColumnEncoder::Continuous { mean, scale } => {
                    if let Some(x) = value.as_number() {
                        features[offset] = (x - mean) / scale;
                    }
                    offset += 1;
                }
                ColumnEncoder::Discrete { slots, width } => {
                    if let Some(cat) = value.as_category() {
                        if let Some(&slot) = slots.get(cat) {
                            features[slot] = 1.0;
                        }
                    }
                    offset += width;
                }
            }
        }
        Ok(features)
    }

    /// Encodes every row of a table. The table must match the fitted schema.
    pub fn encode_table(&self, table: &Table) -> Result<Vec<Vec<f64>>> {
        if table.schema != self.schema {
            return Err(Error::invalid("encoder: table schema mismatch"));
        }
        table.rows.iter().map(|row| self.encode_row(row)).collect()
    }
}
