//! Tabular data model and CSV interchange.
//!
//! A [`Table`] is a row-major collection of cells validated against a
//! [`Schema`]. The on-disk format is plain CSV: comma separated, UTF-8,
//! first non-comment row is the header, empty fields are missing values.
//! Lines starting with `#` are skipped on load so files may carry a
//! provenance line.
//!
//! Schema files are sectioned text:
//!
//! ```text
//! [columns]
//! farm_area_ha = continuous, public
//! region       = discrete, PII
//! ```
//!
//! with one `name = kind[, tag ...]` line per column.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnKind {
    Continuous,
    Discrete,
}

impl ColumnKind {
    pub fn name(self) -> &'static str {
        match self {
            ColumnKind::Continuous => "continuous",
            ColumnKind::Discrete => "discrete",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "continuous" => Some(ColumnKind::Continuous),
            "discrete" => Some(ColumnKind::Discrete),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    /// Free-form markers ("PII", "public", ...) consumed by sensitivity
    /// classification. Unknown tags are carried through untouched.
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<Column>,
}

impl Schema {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let schema = Schema { columns };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.columns.is_empty() {
            return Err(Error::invalid("schema has no columns"));
        }
        let mut seen = BTreeSet::new();
        for col in &self.columns {
            if col.name.is_empty() {
                return Err(Error::invalid("schema contains an empty column name"));
            }
            if !seen.insert(col.name.as_str()) {
                return Err(Error::invalid(format!(
                    "duplicate column name `{}`",
                    col.name
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Like [`Schema::index_of`] but with a descriptive error.
    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::invalid(format!("column `{name}` not found in schema")))
    }

    /// Reads a `[columns]` schema config file.
    pub fn load_config(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
        let mut in_columns = false;
        let mut columns = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(section) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                match section.trim().to_ascii_lowercase().as_str() {
                    "columns" => in_columns = true,
                    other => {
                        return Err(Error::parse(
                            path,
                            line_no,
                            format!("unknown section `[{other}]`"),
                        ))
                    }
                }
                continue;
            }
            if !in_columns {
                return Err(Error::parse(path, line_no, "line outside [columns] section"));
            }
            let (name, rest) = line.split_once('=').ok_or_else(|| {
                Error::parse(path, line_no, "expected `name = kind[, tag ...]`")
            })?;
            let mut parts = rest.split(',');
            let kind_token = parts.next().unwrap_or("").trim();
            let kind = ColumnKind::from_name(kind_token).ok_or_else(|| {
                Error::parse(
                    path,
                    line_no,
                    format!("unknown column kind `{kind_token}` (expected continuous or discrete)"),
                )
            })?;
            let tags: Vec<String> = parts
                .map(|t| t.trim().to_string())
                .filter(|t| !t.is_empty())
                .collect();
            columns.push(Column {
                name: name.trim().to_string(),
                kind,
                tags,
            });
        }
        Schema::new(columns)
    }

    /// Writes the schema in the format accepted by [`Schema::load_config`].
    pub fn save_config(&self, path: &Path, provenance: Option<&str>) -> Result<()> {
        let mut out = String::new();
        if let Some(line) = provenance {
            writeln!(out, "# {line}").unwrap();
        }
        writeln!(out, "[columns]").unwrap();
        for col in &self.columns {
            write!(out, "{} = {}", col.name, col.kind.name()).unwrap();
            for tag in &col.tags {
                write!(out, ", {tag}").unwrap();
            }
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::write(path, e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Missing,
    Number(f64),
    Category(String),
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_category(&self) -> Option<&str> {
        match self {
            Value::Category(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub schema: Schema,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(schema: Schema, rows: Vec<Vec<Value>>) -> Result<Self> {
        let table = Table { schema, rows };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        self.schema.validate()?;
        for (r, row) in self.rows.iter().enumerate() {
            if row.len() != self.schema.len() {
                return Err(Error::invalid(format!(
                    "row {r} has {} cells, schema has {} columns",
                    row.len(),
                    self.schema.len()
                )));
            }
            for (c, value) in row.iter().enumerate() {
                let kind = self.schema.columns[c].kind;
                match (kind, value) {
                    (_, Value::Missing) => {}
                    (ColumnKind::Continuous, Value::Number(v)) => {
                        if !v.is_finite() {
                            return Err(Error::invalid(format!(
                                "row {r}, column `{}`: non-finite value",
                                self.schema.columns[c].name
                            )));
                        }
                    }
                    (ColumnKind::Discrete, Value::Category(_)) => {}
                    _ => {
                        return Err(Error::invalid(format!(
                            "row {r}, column `{}`: value does not match {} kind",
                            self.schema.columns[c].name,
                            kind.name()
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Non-missing numeric values of a continuous column, in row order.
    pub fn continuous_values(&self, col: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter_map(|row| row[col].as_number())
            .collect()
    }

    /// Non-missing category counts for a discrete column, sorted by name.
    pub fn category_counts(&self, col: usize) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for row in &self.rows {
            if let Some(cat) = row[col].as_category() {
                *counts.entry(cat.to_string()).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Category relative frequencies, sorted by name, summing to 1.
    pub fn category_freqs(&self, col: usize) -> BTreeMap<String, f64> {
        let counts = self.category_counts(col);
        let total: usize = counts.values().sum();
        counts
            .into_iter()
            .map(|(cat, n)| (cat, n as f64 / total.max(1) as f64))
            .collect()
    }

    /// [`Table::continuous_values`] addressed by column name.
    pub fn numbers(&self, name: &str) -> Result<Vec<f64>> {
        Ok(self.continuous_values(self.schema.require(name)?))
    }

    /// [`Table::category_freqs`] addressed by column name.
    pub fn freqs(&self, name: &str) -> Result<BTreeMap<String, f64>> {
        Ok(self.category_freqs(self.schema.require(name)?))
    }
}

/// Mean and sample standard deviation; `(0, 0)` for empty input, std 0 for a
/// single value.
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.max(0.0).sqrt())
}

/// Loads a CSV file. When `schema` is given the header must match its column
/// names in order; otherwise the schema is inferred with
/// [`infer_schema_from_records`] using the default distinct threshold.
pub fn load_table(path: &Path, schema: Option<Schema>) -> Result<Table> {
    let (header, records) = read_csv(path)?;
    let schema = match schema {
        Some(s) => {
            let names: Vec<&str> = s.columns.iter().map(|c| c.name.as_str()).collect();
            if header != names {
                return Err(Error::invalid(format!(
                    "{} header {:?} does not match schema columns {:?}",
                    path.display(),
                    header,
                    names
                )));
            }
            s
        }
        None => infer_schema_from_records(&header, &records, DEFAULT_DISTINCT_THRESHOLD)?,
    };
    let mut rows = Vec::with_capacity(records.len());
    for (r, record) in records.iter().enumerate() {
        if record.len() != schema.len() {
            return Err(Error::invalid(format!(
                "{} row {}: {} fields, expected {}",
                path.display(),
                r + 1,
                record.len(),
                schema.len()
            )));
        }
        let mut row = Vec::with_capacity(schema.len());
        for (c, field) in record.iter().enumerate() {
            row.push(parse_cell(field, schema.columns[c].kind).map_err(|msg| {
                Error::invalid(format!(
                    "{} row {}, column `{}`: {msg}",
                    path.display(),
                    r + 1,
                    schema.columns[c].name
                ))
            })?);
        }
        rows.push(row);
    }
    Table::new(schema, rows)
}

fn parse_cell(field: &str, kind: ColumnKind) -> std::result::Result<Value, String> {
    if field.is_empty() {
        return Ok(Value::Missing);
    }
    match kind {
        ColumnKind::Continuous => {
            let v: f64 = field
                .parse()
                .map_err(|_| format!("`{field}` is not a number"))?;
            if !v.is_finite() {
                return Err(format!("`{field}` is not finite"));
            }
            Ok(Value::Number(v))
        }
        ColumnKind::Discrete => Ok(Value::Category(field.to_string())),
    }
}

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::invalid(format!("failed to open {}: {e}", path.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        records.push(record.iter().map(|s| s.to_string()).collect());
    }
    Ok((header, records))
}

/// Writes a table as CSV, optionally preceded by a `#` provenance line.
pub fn save_table(table: &Table, path: &Path, provenance: Option<&str>) -> Result<()> {
    let mut out = String::new();
    if let Some(line) = provenance {
        writeln!(out, "# {line}").unwrap();
    }
    {
        let mut writer = csv::WriterBuilder::new().from_writer(vec![]);
        let names: Vec<&str> = table.schema.columns.iter().map(|c| c.name.as_str()).collect();
        writer
            .write_record(&names)
            .map_err(|e| Error::invalid(e.to_string()))?;
        for row in &table.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Value::Missing => String::new(),
                    Value::Number(x) => format!("{x}"),
                    Value::Category(c) => c.clone(),
                })
                .collect();
            writer
                .write_record(&fields)
                .map_err(|e| Error::invalid(e.to_string()))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::invalid(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    }
    std::fs::write(path, out).map_err(|e| Error::write(path, e))
}

pub const DEFAULT_DISTINCT_THRESHOLD: usize = 20;

/// Infers a schema from a CSV file: a column is discrete when it contains a
/// non-numeric value or has at most `distinct_threshold` distinct non-missing
/// values, continuous otherwise. Inferred schemas carry no tags.
pub fn infer_schema(path: &Path, distinct_threshold: usize) -> Result<Schema> {
    let (header, records) = read_csv(path)?;
    infer_schema_from_records(&header, &records, distinct_threshold)
}

fn infer_schema_from_records(
    header: &[String],
    records: &[Vec<String>],
    distinct_threshold: usize,
) -> Result<Schema> {
    let mut columns = Vec::with_capacity(header.len());
    for (c, name) in header.iter().enumerate() {
        let mut all_numeric = true;
        let mut distinct: BTreeSet<String> = BTreeSet::new();
        for record in records {
            let field = record.get(c).map(|s| s.as_str()).unwrap_or("");
            if field.is_empty() {
                continue;
            }
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    // Key distinctness on the parsed value so "1" and "1.0"
                    // count once.
                    distinct.insert(v.to_bits().to_string());
                }
                _ => {
                    all_numeric = false;
                    distinct.insert(field.to_string());
                }
            }
        }
        let kind = if !all_numeric || distinct.len() <= distinct_threshold {
            ColumnKind::Discrete
        } else {
            ColumnKind::Continuous
        };
        columns.push(Column {
            name: name.clone(),
            kind,
            tags: Vec::new(),
        });
    }
    Schema::new(columns)
}

/// Splits rows into `(rest, holdout)` where the holdout gets
/// `round(fraction * n)` rows chosen by a seeded shuffle. Row order within
/// each part follows the source table.
pub fn split(table: &Table, fraction: f64, seed: u64) -> Result<(Table, Table)> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::invalid(format!(
            "holdout fraction {fraction} outside [0, 1]"
        )));
    }
    let n = table.n_rows();
    let take = (fraction * n as f64).round() as usize;
    let mut indices: Vec<usize> = (0..n).collect();
    use rand::seq::SliceRandom;
    indices.shuffle(&mut rng::substream(seed, &[label::SPLIT]));
    let mut holdout_idx: Vec<usize> = indices[..take].to_vec();
    let mut rest_idx: Vec<usize> = indices[take..].to_vec();
    holdout_idx.sort_unstable();
    rest_idx.sort_unstable();
    let pick = |idx: &[usize]| Table {
        schema: table.schema.clone(),
        rows: idx.iter().map(|&i| table.rows[i].clone()).collect(),
    };
    Ok((pick(&rest_idx), pick(&holdout_idx)))
}

#[derive(Debug, Clone, Serialize)]
pub struct ColumnStats {
    pub name: String,
    pub kind: ColumnKind,
    /// Count of non-missing cells.
    pub count: usize,
    pub missing: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    /// Relative frequencies for discrete columns, sorted by category name.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub frequencies: Vec<(String, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Per-column summary statistics over non-missing cells.
pub fn summarize(table: &Table) -> Vec<ColumnStats> {
    let mut stats = Vec::with_capacity(table.schema.len());
    for (c, col) in table.schema.columns.iter().enumerate() {
        let missing = table.rows.iter().filter(|r| r[c].is_missing()).count();
        let mut entry = ColumnStats {
            name: col.name.clone(),
            kind: col.kind,
            count: table.n_rows() - missing,
            missing,
            mean: None,
            std: None,
            min: None,
            max: None,
            frequencies: Vec::new(),
            warning: None,
        };
        if entry.count == 0 {
            entry.warning = Some("column has no observed values".to_string());
            stats.push(entry);
            continue;
        }
        match col.kind {
            ColumnKind::Continuous => {
                let values = table.continuous_values(c);
                let (mean, std) = mean_std(&values);
                entry.mean = Some(mean);
                entry.std = Some(std);
                entry.min = values.iter().copied().reduce(f64::min);
                entry.max = values.iter().copied().reduce(f64::max);
            }
            ColumnKind::Discrete => {
                entry.frequencies = table.category_freqs(c).into_iter().collect();
            }
        }
        stats.push(entry);
    }
    stats
}
