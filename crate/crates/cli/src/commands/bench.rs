//! `benchmark`.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use polisynth_core::benchmark::benchmark_table;
use polisynth_core::dataset::save_table;

use crate::provenance::Stamp;

#[derive(Args)]
pub struct BenchmarkArgs {
    /// Rows to generate.
    #[arg(long, default_value_t = 5000)]
    pub n: usize,
    /// Output directory for benchmark.csv and benchmark_schema.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Generator seed.
    #[arg(long)]
    pub seed: u64,
}

pub fn benchmark_cmd(args: &BenchmarkArgs) -> Result<u8> {
    let table = benchmark_table(args.n, args.seed);
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let header = Stamp::new("benchmark", args.seed).field("n", args.n).header();
    save_table(&table, &args.out.join("benchmark.csv"), Some(&header))?;
    table
        .schema
        .save_config(&args.out.join("benchmark_schema.json"), Some(&header))?;
    println!(
        "wrote {} benchmark rows and the schema to {}",
        args.n,
        args.out.display()
    );
    Ok(0)
}
