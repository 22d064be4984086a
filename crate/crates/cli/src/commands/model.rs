//! `fit` and `synthesize`.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use polisynth_core::dataset::save_table;
use polisynth_core::sensitivity::{
    classify_attributes, load_sensitivity_config, privacy_bands, SensitivityConfig,
    SensitivityMap,
};
use polisynth_core::synth::{
    backend_by_name, generate_enforced, EnforcementReport, EnforcementStatus, SynthModel,
    DEFAULT_MAX_ITERS,
};

use crate::commands::load_input;
use crate::provenance::Stamp;

/// The one generative backend currently registered.
const BACKEND: &str = "copula";

#[derive(Args)]
pub struct FitArgs {
    /// Real table (CSV).
    #[arg(long)]
    pub data: PathBuf,
    /// Schema file; inferred from the CSV when omitted.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Destination for the fitted model (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Run seed, recorded in the output header.
    #[arg(long)]
    pub seed: u64,
}

pub fn fit_cmd(args: &FitArgs) -> Result<u8> {
    let table = load_input(&args.data, &args.schema)?;
    let backend = backend_by_name(BACKEND)?;
    let model = backend.fit(&table, args.seed)?;
    let stamp = Stamp::new("fit", args.seed)
        .path("data", &args.data)
        .opt_path("schema", &args.schema);
    model.save(&args.out, Some(&stamp.header()))?;
    println!(
        "fitted the {} backend on {} rows, wrote {}",
        backend.name(),
        table.n_rows(),
        args.out.display()
    );
    Ok(0)
}

#[derive(Args)]
pub struct SynthesizeArgs {
    /// Real table the release is measured against (CSV).
    #[arg(long)]
    pub data: PathBuf,
    /// Schema file; inferred from the CSV when omitted.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Fitted model to sample from; fitted from the data when omitted.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Sensitivity map; when omitted every attribute defaults to High.
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Tag keywords, overrides, bands and distortion settings.
    #[arg(long)]
    pub sensitivity_config: Option<PathBuf>,
    /// Rows to generate; the real table's size when omitted.
    #[arg(long)]
    pub n: Option<usize>,
    /// Enforcement iteration budget.
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    /// Output directory for synthetic.csv, model.json, enforcement.jsonl.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for sampling and distortion.
    #[arg(long)]
    pub seed: u64,
}

pub fn synthesize_cmd(args: &SynthesizeArgs) -> Result<u8> {
    let table = load_input(&args.data, &args.schema)?;
    let backend = backend_by_name(BACKEND)?;
    let model: Box<dyn SynthModel> = match &args.model {
        Some(path) => backend.load(path)?,
        None => backend.fit(&table, args.seed)?,
    };
    let config = match &args.sensitivity_config {
        Some(path) => load_sensitivity_config(path)?,
        None => SensitivityConfig::default(),
    };
    let map = match &args.map {
        Some(path) => SensitivityMap::load(path)?,
        None => classify_attributes(&table.schema, &[], &config.tag_keywords, &config.overrides),
    };
    let bands = privacy_bands(&map, &config.bands)?;
    let n = args.n.unwrap_or_else(|| table.n_rows());
    let (synthetic, report) = generate_enforced(
        model.as_ref(),
        &table,
        &map,
        &bands,
        &config.distortion,
        n,
        args.seed,
        args.max_iters,
    )?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let stamp = Stamp::new("synthesize", args.seed)
        .path("data", &args.data)
        .opt_path("schema", &args.schema)
        .opt_path("model", &args.model)
        .opt_path("map", &args.map)
        .opt_path("sensitivity-config", &args.sensitivity_config)
        .field("n", n)
        .field("max-iters", args.max_iters);
    let header = stamp.header();
    save_table(&synthetic, &args.out.join("synthetic.csv"), Some(&header))?;
    model.save(&args.out.join("model.json"), Some(&header))?;
    write_enforcement(&args.out.join("enforcement.jsonl"), &report, &header)?;

    for attr in &report.attributes {
        println!(
            "  {:<24} {:<8} emd={:.4} band=[{:.3},{:.3}] noise={:.3} flip={:.3}",
            attr.attribute,
            status_name(attr.status),
            attr.final_emd,
            attr.band.t_min,
            attr.band.t_max,
            attr.final_noise_scale,
            attr.final_flip_prob,
        );
    }
    if report.all_accepted {
        println!(
            "enforcement accepted {} rows after {} iterations",
            n, report.iterations
        );
        Ok(0)
    } else {
        eprintln!(
            "enforcement did not converge within {} iterations; outputs written anyway",
            report.iterations
        );
        Ok(3)
    }
}

fn status_name(status: EnforcementStatus) -> &'static str {
    match status {
        EnforcementStatus::Accepted => "accepted",
        EnforcementStatus::Failed => "failed",
    }
}

/// One summary line, then one line per attribute with its trajectory.
fn write_enforcement(path: &PathBuf, report: &EnforcementReport, header: &str) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# {header}").unwrap();
    let summary = serde_json::json!({
        "iterations": report.iterations,
        "sample_size": report.sample_size,
        "seed": report.seed,
        "all_accepted": report.all_accepted,
    });
    writeln!(out, "{summary}").unwrap();
    for attr in &report.attributes {
        writeln!(out, "{}", serde_json::to_string(attr)?).unwrap();
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
