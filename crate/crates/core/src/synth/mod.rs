//! Tabular synthesis through a latent-Gaussian copula.
//!
//! Fitting builds one marginal model per column (a Gaussian mixture for
//! continuous columns, category frequencies for discrete ones), maps every
//! observed cell to a latent standard-normal score, and estimates the
//! latent correlation matrix from pairwise-complete scores. Sampling draws
//! correlated normals through the Cholesky factor and pushes each
//! coordinate back through its column's inverse marginal.
//!
//! Latent scores: continuous cells use averaged-rank empirical CDF
//! positions r/(n+1); discrete cells sit at the middle of their category's
//! cumulative-frequency interval, categories in lexicographic order. The
//! correlation matrix is shrunk toward the identity until its Cholesky
//! factorization succeeds, so sampling never fails on an estimable input.

pub mod backend;
pub mod distort;
pub mod enforce;
pub mod gmm;

pub use backend::{backend_by_name, backend_names, GenerativeBackend, SynthModel};
pub use distort::{distort, DistortionConfig, LevelParams};
pub use enforce::{
    generate_enforced, AttributeEnforcement, EnforcementReport, EnforcementStatus, IterationPoint,
    DEFAULT_MAX_ITERS,
};
pub use gmm::{
    fit_gmm, fit_gmm_traced, mode_denormalize, mode_normalize, GmmTrace, ModeModel, NormalizedCell,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataset::{ColumnKind, Schema, Table, Value};
use crate::error::{Error, Result};
use crate::rng::{label, substream};

/// Format tag written into persisted models.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Fewest rows a fit will accept.
pub const MIN_FIT_ROWS: usize = 30;

/// Starting weight of the identity in correlation shrinkage.
const CORRELATION_SHRINKAGE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ColumnModel {
    Continuous {
        mode: gmm::ModeModel,
        /// Sorted reference values the step quantile function walks. These
        /// are the fitted column's observations after a normalize and
        /// denormalize roundtrip through the mode model.
        reference: Vec<f64>,
    },
    Discrete {
        categories: Vec<String>,
        frequencies: Vec<f64>,
        /// Cumulative frequencies; the last entry is exactly 1.
        cumulative: Vec<f64>,
    },
}

impl ColumnModel {
    /// Inverse marginal: maps a uniform score to a cell value.
    fn invert(&self, u: f64) -> Value {
        match self {
            ColumnModel::Continuous { reference, .. } => {
                let m = reference.len();
                let idx = ((u * m as f64).ceil() as isize - 1).clamp(0, m as isize - 1);
                Value::Number(reference[idx as usize])
            }
            ColumnModel::Discrete {
                categories,
                cumulative,
                ..
            } => {
                let k = cumulative
                    .iter()
                    .position(|&c| u <= c)
                    .unwrap_or(categories.len() - 1);
                Value::Category(categories[k].clone())
            }
        }
    }
}

/// Fitted copula model for one schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularModel {
    version: u32,
    n_fit: usize,
    shrinkage: f64,
    schema: Schema,
    columns: Vec<ColumnModel>,
    correlation: Vec<Vec<f64>>,
}

impl TabularModel {
    /// Fits marginals and the latent correlation matrix. Needs at least
    /// [`MIN_FIT_ROWS`] rows; missing cells are skipped per column and per
    /// pair.
    pub fn fit(table: &Table, seed: u64) -> Result<TabularModel> {
        if table.n_rows() < MIN_FIT_ROWS {
            return Err(Error::invalid(format!(
                "fit needs at least {MIN_FIT_ROWS} rows, got {}",
                table.n_rows()
            )));
        }
        let normal = std_normal();
        let d = table.schema.columns.len();
        let n_rows = table.n_rows();
        let mut columns = Vec::with_capacity(d);
        let mut latent: Vec<Vec<Option<f64>>> = Vec::with_capacity(d);
        for (idx, column) in table.schema.columns.iter().enumerate() {
            let mut scores = vec![None; n_rows];
            match column.kind {
                ColumnKind::Continuous => {
                    let observed: Vec<(usize, f64)> = table
                        .rows
                        .iter()
                        .enumerate()
                        .filter_map(|(r, row)| row[idx].as_number().map(|v| (r, v)))
                        .collect();
                    if observed.is_empty() {
                        return Err(Error::invalid(format!(
                            "column `{}` has no observed values",
                            column.name
                        )));
                    }
                    let values: Vec<f64> = observed.iter().map(|&(_, v)| v).collect();
                    let mut gmm_rng = substream(seed, &[label::GMM_INIT, idx as u64]);
                    let mode = gmm::fit_gmm(&values, &mut gmm_rng)?;
                    let mut norm_rng = substream(seed, &[label::MODE_NORMALIZE, idx as u64]);
                    let cells = gmm::mode_normalize(&values, &mode, &mut norm_rng);
                    let mut reference = gmm::mode_denormalize(&cells, &mode);
                    reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    let n_obs = values.len() as f64;
                    for (&(r, _), rank) in observed.iter().zip(averaged_ranks(&values)) {
                        scores[r] = Some(normal.inverse_cdf(rank / (n_obs + 1.0)));
                    }
                    columns.push(ColumnModel::Continuous { mode, reference });
                }
                ColumnKind::Discrete => {
                    let freqs = table.freqs(&column.name)?;
                    if freqs.is_empty() {
                        return Err(Error::invalid(format!(
                            "column `{}` has no observed values",
                            column.name
                        )));
                    }
                    let categories: Vec<String> = freqs.keys().cloned().collect();
                    let frequencies: Vec<f64> = freqs.values().copied().collect();
                    let mut cumulative = Vec::with_capacity(frequencies.len());
                    let mut acc = 0.0;
                    for f in &frequencies {
                        acc += f;
                        cumulative.push(acc);
                    }
                    *cumulative.last_mut().unwrap() = 1.0;
                    let mids: Vec<f64> = (0..categories.len())
                        .map(|k| {
                            let lo = if k == 0 { 0.0 } else { cumulative[k - 1] };
                            normal.inverse_cdf((lo + cumulative[k]) / 2.0)
                        })
                        .collect();
                    for (r, row) in table.rows.iter().enumerate() {
                        if let Some(cat) = row[idx].as_category() {
                            let k = categories.binary_search_by(|c| c.as_str().cmp(cat)).unwrap();
                            scores[r] = Some(mids[k]);
                        }
                    }
                    columns.push(ColumnModel::Discrete {
                        categories,
                        frequencies,
                        cumulative,
                    });
                }
            }
            latent.push(scores);
        }

        let mut sample_corr = vec![vec![0.0; d]; d];
        for i in 0..d {
            sample_corr[i][i] = 1.0;
            for j in (i + 1)..d {
                let r = pairwise_correlation(&latent[i], &latent[j]);
                sample_corr[i][j] = r;
                sample_corr[j][i] = r;
            }
        }
        let (correlation, shrinkage) = shrink_to_spd(&sample_corr);

        Ok(TabularModel {
            version: MODEL_FORMAT_VERSION,
            n_fit: n_rows,
            shrinkage,
            schema: table.schema.clone(),
            columns,
            correlation,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn n_fit(&self) -> usize {
        self.n_fit
    }

    pub fn shrinkage(&self) -> f64 {
        self.shrinkage
    }

    fn cholesky_factor(&self) -> Result<DMatrix<f64>> {
        let d = self.correlation.len();
        let m = DMatrix::from_fn(d, d, |i, j| self.correlation[i][j]);
        m.cholesky()
            .map(|c| c.l())
            .ok_or_else(|| Error::invalid("stored correlation matrix is not positive definite"))
    }

    /// Draws `n` rows. Each column consumes its own substream of the seed,
    /// and identical (model, n, seed) triples give identical tables.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Table> {
        let l = self.cholesky_factor()?;
        let normal = std_normal();
        let d = self.columns.len();
        let mut w = vec![vec![0.0f64; n]; d];
        for (col, stream) in w.iter_mut().enumerate() {
            let mut rng = substream(seed, &[label::SAMPLE, col as u64]);
            for slot in stream.iter_mut() {
                *slot = normal.inverse_cdf(positive_unit(rand::Rng::random::<f64>(&mut rng)));
            }
        }
        let mut rows = Vec::with_capacity(n);
        for r in 0..n {
            let mut row = Vec::with_capacity(d);
            for i in 0..d {
                let mut z = 0.0;
                for j in 0..=i {
                    z += l[(i, j)] * w[j][r];
                }
                row.push(self.columns[i].invert(normal.cdf(z)));
            }
            rows.push(row);
        }
        Table::new(self.schema.clone(), rows)
    }

    /// Draws `n` rows with one discrete column pinned to a category. The
    /// pinned column's latent score is drawn from its category's
    /// cumulative-frequency interval and the remaining columns follow the
    /// conditional Gaussian. A category holding all the mass leaves nothing
    /// to condition on, so that case falls back to [`TabularModel::sample`].
    pub fn sample_conditional(
        &self,
        n: usize,
        seed: u64,
        column: &str,
        category: &str,
    ) -> Result<Table> {
        let c = self.schema.require(column)?;
        let ColumnModel::Discrete {
            categories,
            cumulative,
            ..
        } = &self.columns[c]
        else {
            return Err(Error::invalid(format!(
                "conditional sampling requires a discrete column, `{column}` is continuous"
            )));
        };
        let k = categories
            .iter()
            .position(|cat| cat == category)
            .ok_or_else(|| {
                Error::invalid(format!("column `{column}` has no category `{category}`"))
            })?;
        let lo = if k == 0 { 0.0 } else { cumulative[k - 1] };
        let hi = cumulative[k];
        if lo == 0.0 && hi == 1.0 {
            return self.sample(n, seed);
        }

        let normal = std_normal();
        let d = self.columns.len();
        let others: Vec<usize> = (0..d).filter(|&i| i != c).collect();
        let r_vec: Vec<f64> = others.iter().map(|&i| self.correlation[i][c]).collect();
        let schur = DMatrix::from_fn(others.len(), others.len(), |a, b| {
            self.correlation[others[a]][others[b]] - r_vec[a] * r_vec[b]
        });
        let l = cholesky_with_ridge(schur)?;

        let mut c_rng = substream(seed, &[label::SAMPLE, c as u64]);
        let mut w = vec![vec![0.0f64; n]; others.len()];
        for (slot, &col) in w.iter_mut().zip(&others) {
            let mut rng = substream(seed, &[label::SAMPLE, col as u64]);
            for v in slot.iter_mut() {
                *v = normal.inverse_cdf(positive_unit(rand::Rng::random::<f64>(&mut rng)));
            }
        }
        let mut rows = Vec::with_capacity(n);
        for r in 0..n {
            let u: f64 = positive_unit(rand::Rng::random::<f64>(&mut c_rng));
            let z_c = normal.inverse_cdf(lo + u * (hi - lo));
            let mut row = vec![Value::Missing; d];
            row[c] = Value::Category(category.to_string());
            for (a, &i) in others.iter().enumerate() {
                let mut z = r_vec[a] * z_c;
                for b in 0..=a {
                    z += l[(a, b)] * w[b][r];
                }
                row[i] = self.columns[i].invert(normal.cdf(z));
            }
            rows.push(row);
        }
        Table::new(self.schema.clone(), rows)
    }

    /// Writes the model as JSON, preceded by an optional `#` header line.
    pub fn save(&self, path: &std::path::Path, provenance: Option<&str>) -> Result<()> {
        let mut out = String::new();
        if let Some(line) = provenance {
            out.push_str(&format!("# {line}\n"));
        }
        let json =
            serde_json::to_string_pretty(self).map_err(|e| Error::invalid(e.to_string()))?;
        out.push_str(&json);
        out.push('\n');
        std::fs::write(path, out).map_err(|e| Error::write(path, e))
    }

    /// Reads a model saved by [`TabularModel::save`]. Leading `#` lines are
    /// skipped; the format version must match.
    pub fn load(path: &std::path::Path) -> Result<TabularModel> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
        let body: String = text
            .lines()
            .filter(|line| !line.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n");
        let model: TabularModel = serde_json::from_str(&body)
            .map_err(|e| Error::parse(path, 1, format!("bad model file: {e}")))?;
        model.validate().map_err(|e| {
            Error::invalid(format!("{}: {e}", path.display()))
        })?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        if self.version != MODEL_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                self.version
            )));
        }
        let d = self.schema.columns.len();
        if self.columns.len() != d || self.correlation.len() != d {
            return Err(Error::invalid("model shape does not match its schema"));
        }
        if self.correlation.iter().any(|row| row.len() != d) {
            return Err(Error::invalid("correlation matrix is not square"));
        }
        for (column, model) in self.schema.columns.iter().zip(&self.columns) {
            match (column.kind, model) {
                (ColumnKind::Continuous, ColumnModel::Continuous { reference, .. }) => {
                    if reference.is_empty() {
                        return Err(Error::invalid(format!(
                            "column `{}` has an empty reference sample",
                            column.name
                        )));
                    }
                }
                (ColumnKind::Discrete, ColumnModel::Discrete { cumulative, .. }) => {
                    if cumulative.last() != Some(&1.0) {
                        return Err(Error::invalid(format!(
                            "column `{}` has cumulative frequencies not ending at 1",
                            column.name
                        )));
                    }
                }
                _ => {
                    return Err(Error::invalid(format!(
                        "column `{}` kind does not match its marginal model",
                        column.name
                    )))
                }
            }
        }
        Ok(())
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

fn positive_unit(u: f64) -> f64 {
    if u <= 0.0 {
        f64::MIN_POSITIVE
    } else {
        u
    }
}

/// One-based ranks with ties averaged.
fn averaged_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j + 1) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = mean_rank;
        }
        i = j;
    }
    ranks
}

/// Pearson correlation over rows where both scores are present.
fn pairwise_correlation(a: &[Option<f64>], b: &[Option<f64>]) -> f64 {
    let pairs: Vec<(f64, f64)> = a
        .iter()
        .zip(b)
        .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
        .collect();
    if pairs.len() < 2 {
        return 0.0;
    }
    let n = pairs.len() as f64;
    let mean_x = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in &pairs {
        sxy += (x - mean_x) * (y - mean_y);
        sxx += (x - mean_x) * (x - mean_x);
        syy += (y - mean_y) * (y - mean_y);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Blends a sample correlation matrix toward the identity until it is
/// positive definite, stepping the identity weight by 0.05. Returns the
/// blended matrix and the weight that worked.
fn shrink_to_spd(sample: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
    let d = sample.len();
    let mut lambda = CORRELATION_SHRINKAGE;
    loop {
        let blended: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        if i == j {
                            1.0
                        } else {
                            (1.0 - lambda) * sample[i][j]
                        }
                    })
                    .collect()
            })
            .collect();
        let m = DMatrix::from_fn(d, d, |i, j| blended[i][j]);
        if m.cholesky().is_some() {
            return (blended, lambda);
        }
        lambda = (lambda + CORRELATION_SHRINKAGE).min(1.0);
        if lambda >= 1.0 {
            // Pure identity; always factorizable.
            let identity: Vec<Vec<f64>> = (0..d)
                .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            return (identity, 1.0);
        }
    }
}

/// Cholesky of a conditional covariance, adding a small ridge when the
/// matrix is numerically on the boundary.
fn cholesky_with_ridge(mut m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    for attempt in 0..24 {
        if let Some(c) = m.clone().cholesky() {
            return Ok(c.l());
        }
        let ridge = 0.05 * (attempt + 1) as f64;
        for i in 0..m.nrows() {
            m[(i, i)] += ridge;
        }
    }
    Err(Error::invalid(
        "conditional covariance could not be factorized",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Column, Schema};
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn mixed_schema() -> Schema {
        Schema::new(vec![
            Column {
                name: "x".into(),
                kind: ColumnKind::Continuous,
                tags: vec![],
            },
            Column {
                name: "y".into(),
                kind: ColumnKind::Continuous,
                tags: vec![],
            },
            Column {
                name: "group".into(),
                kind: ColumnKind::Discrete,
                tags: vec![],
            },
        ])
        .unwrap()
    }

    /// x ~ N(0,1); y tracks x closely; group follows the sign of x.
    fn correlated_table(n: usize) -> Table {
        let mut rng = crate::rng::RngStream::seed_from_u64(31);
        let rows = (0..n)
            .map(|_| {
                let x: f64 = StandardNormal.sample(&mut rng);
                let e: f64 = StandardNormal.sample(&mut rng);
                let y = x + 0.1 * e;
                let group = if x > 0.0 { "pos" } else { "neg" };
                vec![
                    Value::Number(x),
                    Value::Number(y),
                    Value::Category(group.into()),
                ]
            })
            .collect();
        Table::new(mixed_schema(), rows).unwrap()
    }

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let opts: Vec<Option<f64>> = a.iter().copied().map(Some).collect();
        let optb: Vec<Option<f64>> = b.iter().copied().map(Some).collect();
        pairwise_correlation(&opts, &optb)
    }

    #[test]
    fn fit_rejects_tiny_tables() {
        let table = correlated_table(10);
        assert!(TabularModel::fit(&table, 1).is_err());
        let table = correlated_table(MIN_FIT_ROWS);
        assert!(TabularModel::fit(&table, 1).is_ok());
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let model = TabularModel::fit(&correlated_table(400), 7).unwrap();
        let a = model.sample(100, 11).unwrap();
        let b = model.sample(100, 11).unwrap();
        let c = model.sample(100, 12).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_ne!(a.rows, c.rows);
    }

    #[test]
    fn sampled_marginals_track_the_fit_data() {
        let table = correlated_table(2000);
        let model = TabularModel::fit(&table, 7).unwrap();
        let synth = model.sample(2000, 3).unwrap();
        let ks = crate::metrics::ks_stat(
            &table.numbers("x").unwrap(),
            &synth.numbers("x").unwrap(),
        )
        .unwrap();
        assert!(ks < 0.08, "continuous KS {ks}");
        let tv = crate::metrics::emd_categorical(
            &table.freqs("group").unwrap(),
            &synth.freqs("group").unwrap(),
        )
        .unwrap();
        assert!(tv < 0.08, "categorical TV {tv}");
    }

    #[test]
    fn sampled_correlations_track_the_fit_data() {
        let table = correlated_table(2000);
        let model = TabularModel::fit(&table, 7).unwrap();
        let synth = model.sample(2000, 3).unwrap();
        let x = synth.numbers("x").unwrap();
        let y = synth.numbers("y").unwrap();
        let r = pearson(&x, &y);
        assert!(r > 0.7, "sampled correlation {r}");
        // Group tracks the sign of x in the synthetic rows too.
        let g_idx = synth.schema.index_of("group").unwrap();
        let x_idx = synth.schema.index_of("x").unwrap();
        let agree = synth
            .rows
            .iter()
            .filter(|row| {
                let x = row[x_idx].as_number().unwrap();
                let g = row[g_idx].as_category().unwrap();
                (x > 0.0) == (g == "pos")
            })
            .count() as f64
            / synth.n_rows() as f64;
        assert!(agree > 0.75, "sign agreement {agree}");
    }

    #[test]
    fn model_roundtrips_bit_identically_through_json() {
        let model = TabularModel::fit(&correlated_table(300), 7).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save(&path, Some("model test")).unwrap();
        let loaded = TabularModel::load(&path).unwrap();
        assert_eq!(loaded, model);
        let a = model.sample(200, 5).unwrap();
        let b = loaded.sample(200, 5).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn load_rejects_other_format_versions() {
        let model = TabularModel::fit(&correlated_table(100), 7).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save(&path, None).unwrap();
        let text = std::fs::read_to_string(&path)
            .unwrap()
            .replace("\"version\": 1", "\"version\": 999");
        std::fs::write(&path, text).unwrap();
        let err = TabularModel::load(&path).unwrap_err();
        assert!(err.to_string().contains("version"), "{err}");
    }

    #[test]
    fn conditional_sampling_pins_the_category() {
        let table = correlated_table(1000);
        let model = TabularModel::fit(&table, 7).unwrap();
        let synth = model.sample_conditional(500, 9, "group", "pos").unwrap();
        let g_idx = synth.schema.index_of("group").unwrap();
        assert!(synth
            .rows
            .iter()
            .all(|row| row[g_idx].as_category() == Some("pos")));
        // Conditioning on the positive group shifts x upward.
        let x_mean = synth
            .numbers("x")
            .unwrap()
            .iter()
            .sum::<f64>()
            / 500.0;
        assert!(x_mean > 0.3, "conditional mean {x_mean}");
    }

    #[test]
    fn conditioning_on_a_full_mass_category_matches_unconditional() {
        let schema = Schema::new(vec![
            Column {
                name: "x".into(),
                kind: ColumnKind::Continuous,
                tags: vec![],
            },
            Column {
                name: "only".into(),
                kind: ColumnKind::Discrete,
                tags: vec![],
            },
        ])
        .unwrap();
        let mut rng = crate::rng::RngStream::seed_from_u64(2);
        let rows = (0..200)
            .map(|_| {
                let x: f64 = StandardNormal.sample(&mut rng);
                vec![Value::Number(x), Value::Category("all".into())]
            })
            .collect();
        let table = Table::new(schema, rows).unwrap();
        let model = TabularModel::fit(&table, 7).unwrap();
        let unconditional = model.sample(100, 5).unwrap();
        let conditional = model.sample_conditional(100, 5, "only", "all").unwrap();
        assert_eq!(unconditional.rows, conditional.rows);
    }

    #[test]
    fn conditional_rejects_bad_targets() {
        let model = TabularModel::fit(&correlated_table(100), 7).unwrap();
        assert!(model.sample_conditional(10, 1, "x", "pos").is_err());
        assert!(model.sample_conditional(10, 1, "group", "nope").is_err());
        assert!(model.sample_conditional(10, 1, "missing", "pos").is_err());
    }

    #[test]
    fn missing_cells_are_tolerated_in_fit() {
        let mut table = correlated_table(300);
        for (i, row) in table.rows.iter_mut().enumerate() {
            if i % 7 == 0 {
                row[0] = Value::Missing;
            }
            if i % 11 == 0 {
                row[2] = Value::Missing;
            }
        }
        let table = Table::new(table.schema.clone(), table.rows).unwrap();
        let model = TabularModel::fit(&table, 7).unwrap();
        let synth = model.sample(100, 1).unwrap();
        assert!(synth
            .rows
            .iter()
            .all(|row| row.iter().all(|v| !v.is_missing())));
    }

    #[test]
    fn shrinkage_escalates_on_indefinite_pairwise_matrices() {
        // A matrix a pairwise-complete estimate can produce: not positive
        // definite at the base shrinkage.
        let sample = vec![
            vec![1.0, 0.9, 0.0],
            vec![0.9, 1.0, 0.9],
            vec![0.0, 0.9, 1.0],
        ];
        let (blended, lambda) = shrink_to_spd(&sample);
        assert!(lambda > CORRELATION_SHRINKAGE, "lambda {lambda}");
        let d = blended.len();
        let m = DMatrix::from_fn(d, d, |i, j| blended[i][j]);
        assert!(m.cholesky().is_some());
        // A well-behaved matrix keeps the base shrinkage.
        let tame = vec![vec![1.0, 0.3], vec![0.3, 1.0]];
        let (_, lambda) = shrink_to_spd(&tame);
        assert_eq!(lambda, CORRELATION_SHRINKAGE);
    }

    #[test]
    fn averaged_ranks_handle_ties() {
        let ranks = averaged_ranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(ranks, vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn degenerate_uniform_draw_stays_finite() {
        assert!(positive_unit(0.0) > 0.0);
        let normal = std_normal();
        assert!(normal.inverse_cdf(positive_unit(0.0)).is_finite());
    }
}
