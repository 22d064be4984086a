//! Generative backends behind a narrow fit/sample interface.
//!
//! Callers pick a backend by name and only ever hold trait objects, so a
//! new generator plugs in by implementing the two traits and adding itself
//! to [`backends`].

use std::path::Path;

use crate::dataset::{Schema, Table};
use crate::error::{Error, Result};
use crate::synth::TabularModel;

/// A fitted model that can be sampled and persisted.
pub trait SynthModel {
    fn schema(&self) -> &Schema;
    fn sample(&self, n: usize, seed: u64) -> Result<Table>;
    fn sample_conditional(&self, n: usize, seed: u64, column: &str, category: &str)
        -> Result<Table>;
    fn save(&self, path: &Path, provenance: Option<&str>) -> Result<()>;
}

/// A family of models: knows how to fit one and how to load one back.
pub trait GenerativeBackend {
    fn name(&self) -> &'static str;
    fn fit(&self, table: &Table, seed: u64) -> Result<Box<dyn SynthModel>>;
    fn load(&self, path: &Path) -> Result<Box<dyn SynthModel>>;
}

struct CopulaBackend;

impl GenerativeBackend for CopulaBackend {
    fn name(&self) -> &'static str {
        "copula"
    }

    fn fit(&self, table: &Table, seed: u64) -> Result<Box<dyn SynthModel>> {
        Ok(Box::new(TabularModel::fit(table, seed)?))
    }

    fn load(&self, path: &Path) -> Result<Box<dyn SynthModel>> {
        Ok(Box::new(TabularModel::load(path)?))
    }
}

impl SynthModel for TabularModel {
    fn schema(&self) -> &Schema {
        TabularModel::schema(self)
    }

    fn sample(&self, n: usize, seed: u64) -> Result<Table> {
        TabularModel::sample(self, n, seed)
    }

    fn sample_conditional(
        &self,
        n: usize,
        seed: u64,
        column: &str,
        category: &str,
    ) -> Result<Table> {
        TabularModel::sample_conditional(self, n, seed, column, category)
    }

    fn save(&self, path: &Path, provenance: Option<&str>) -> Result<()> {
        TabularModel::save(self, path, provenance)
    }
}

/// Every registered backend, in registration order.
pub fn backends() -> Vec<Box<dyn GenerativeBackend>> {
    vec![Box::new(CopulaBackend)]
}

pub fn backend_names() -> Vec<&'static str> {
    backends().iter().map(|b| b.name()).collect()
}

/// Looks a backend up by name; the error lists what exists.
pub fn backend_by_name(name: &str) -> Result<Box<dyn GenerativeBackend>> {
    backends()
        .into_iter()
        .find(|b| b.name() == name)
        .ok_or_else(|| {
            Error::invalid(format!(
                "unknown backend `{name}`; available: {}",
                backend_names().join(", ")
            ))
        })
}
