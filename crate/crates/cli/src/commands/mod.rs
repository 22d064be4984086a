pub mod bench;
pub mod model;
pub mod report;
pub mod rules;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use polisynth_core::dataset::{load_table, Schema, Table};

/// Loads a CSV with an explicit schema file, or infers one from the data.
fn load_input(data: &Path, schema: &Option<PathBuf>) -> Result<Table> {
    let schema = match schema {
        Some(path) => Some(Schema::load_config(path)?),
        None => None,
    };
    load_table(data, schema).with_context(|| format!("loading {}", data.display()))
}

/// `file_stem` as a rule-source identifier.
fn source_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "policy".to_string())
}
