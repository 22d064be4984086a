//! Marginal distortion applied to synthetic tables.
//!
//! Continuous cells get additive Gaussian noise scaled by the column's own
//! standard deviation; discrete cells are resampled from the column's own
//! marginal with a per-cell flip probability. Missing cells pass through.
//! Every column uses its own substream keyed by column position and
//! iteration number, so distorting column A never changes what happens to
//! column B.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{ColumnKind, Table, Value};
use crate::error::{Error, Result};
use crate::rng::{label, substream};
use crate::sensitivity::{SensitivityLevel, SensitivityMap};

/// Distortion strength for one sensitivity level or one attribute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelParams {
    /// Gaussian noise scale for continuous columns, in units of the
    /// column's standard deviation.
    pub noise_scale: f64,
    /// Per-cell resampling probability for discrete columns.
    pub flip_prob: f64,
}

impl LevelParams {
    pub fn none() -> LevelParams {
        LevelParams {
            noise_scale: 0.0,
            flip_prob: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.noise_scale.is_finite()
            && self.noise_scale >= 0.0
            && (0.0..=1.0).contains(&self.flip_prob);
        if !ok {
            return Err(Error::invalid(format!(
                "distortion params (noise {}, flip {}) out of range",
                self.noise_scale, self.flip_prob
            )));
        }
        Ok(())
    }
}

/// Per-level distortion defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionConfig {
    pub low: LevelParams,
    pub medium: LevelParams,
    pub high: LevelParams,
}

impl Default for DistortionConfig {
    fn default() -> Self {
        DistortionConfig {
            low: LevelParams {
                noise_scale: 0.0,
                flip_prob: 0.0,
            },
            medium: LevelParams {
                noise_scale: 0.02,
                flip_prob: 0.02,
            },
            high: LevelParams {
                noise_scale: 0.05,
                flip_prob: 0.05,
            },
        }
    }
}

impl DistortionConfig {
    pub fn for_level(&self, level: SensitivityLevel) -> (f64, f64) {
        let p = match level {
            SensitivityLevel::Low => self.low,
            SensitivityLevel::Medium => self.medium,
            SensitivityLevel::High => self.high,
        };
        (p.noise_scale, p.flip_prob)
    }

    pub fn params_for(&self, level: SensitivityLevel) -> LevelParams {
        match level {
            SensitivityLevel::Low => self.low,
            SensitivityLevel::Medium => self.medium,
            SensitivityLevel::High => self.high,
        }
    }

    pub fn set_level(&mut self, level: SensitivityLevel, noise_scale: f64, flip_prob: f64) {
        let params = LevelParams {
            noise_scale,
            flip_prob,
        };
        match level {
            SensitivityLevel::Low => self.low = params,
            SensitivityLevel::Medium => self.medium = params,
            SensitivityLevel::High => self.high = params,
        }
    }

    /// Valid parameters that do not weaken as the level rises.
    pub fn validate(&self) -> Result<()> {
        self.low.validate()?;
        self.medium.validate()?;
        self.high.validate()?;
        let noise_ok = self.low.noise_scale <= self.medium.noise_scale
            && self.medium.noise_scale <= self.high.noise_scale;
        let flip_ok = self.low.flip_prob <= self.medium.flip_prob
            && self.medium.flip_prob <= self.high.flip_prob;
        if !noise_ok || !flip_ok {
            return Err(Error::invalid(
                "distortion strength must not decrease with sensitivity level",
            ));
        }
        Ok(())
    }
}

/// Distorts a table using per-level defaults from the config and the
/// attribute levels from the map.
pub fn distort(
    table: &Table,
    map: &SensitivityMap,
    config: &DistortionConfig,
    seed: u64,
) -> Result<Table> {
    config.validate()?;
    let mut params = BTreeMap::new();
    for column in &table.schema.columns {
        let level = map.level_of(&column.name)?;
        params.insert(column.name.clone(), config.params_for(level));
    }
    distort_columns(table, &params, seed, 0)
}

/// Distorts with explicit per-attribute parameters. `iteration` separates
/// the randomness of repeated passes over the same table.
pub(crate) fn distort_columns(
    table: &Table,
    params: &BTreeMap<String, LevelParams>,
    seed: u64,
    iteration: u64,
) -> Result<Table> {
    for column in &table.schema.columns {
        let level_params = params
            .get(&column.name)
            .ok_or_else(|| Error::invalid(format!("no distortion params for `{}`", column.name)))?;
        level_params.validate()?;
    }
    let mut rows = table.rows.clone();
    for (idx, column) in table.schema.columns.iter().enumerate() {
        let level_params = params[&column.name];
        let mut rng = substream(seed, &[label::DISTORT, iteration, idx as u64]);
        match column.kind {
            ColumnKind::Continuous => {
                if level_params.noise_scale == 0.0 {
                    continue;
                }
                let values = table.numbers(&column.name)?;
                if values.is_empty() {
                    continue;
                }
                let (_, std) = crate::dataset::mean_std(&values);
                let scale = level_params.noise_scale * std;
                for row in &mut rows {
                    if let Value::Number(x) = row[idx] {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        row[idx] = Value::Number(x + scale * z);
                    }
                }
            }
            ColumnKind::Discrete => {
                if level_params.flip_prob == 0.0 {
                    continue;
                }
                let freqs = table.freqs(&column.name)?;
                if freqs.is_empty() {
                    continue;
                }
                let categories: Vec<(&String, f64)> =
                    freqs.iter().map(|(c, &f)| (c, f)).collect();
                for row in &mut rows {
                    if matches!(row[idx], Value::Missing) {
                        continue;
                    }
                    if rng.random::<f64>() >= level_params.flip_prob {
                        continue;
                    }
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut chosen = categories.len() - 1;
                    for (i, (_, f)) in categories.iter().enumerate() {
                        acc += f;
                        if u <= acc {
                            chosen = i;
                            break;
                        }
                    }
                    row[idx] = Value::Category(categories[chosen].0.clone());
                }
            }
        }
    }
    Table::new(table.schema.clone(), rows)
}
