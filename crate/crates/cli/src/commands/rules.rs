//! `extract-rules` and `classify`.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use polisynth_core::dataset::Schema;
use polisynth_core::policy::{
    export_rules, extract_rules, import_rules, DeonticRule, DeonticType, TriggerLexicon,
};
use polisynth_core::sensitivity::{
    classify_attributes, load_sensitivity_config, SensitivityConfig, SensitivityLevel,
};

use crate::commands::source_id;
use crate::provenance::Stamp;

#[derive(Args)]
pub struct ExtractRulesArgs {
    /// Policy document (plain text).
    #[arg(long)]
    pub policy: PathBuf,
    /// Destination for the extracted rules (JSON lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Run seed, recorded in the output header.
    #[arg(long)]
    pub seed: u64,
}

pub fn extract_rules_cmd(args: &ExtractRulesArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.policy)
        .with_context(|| format!("reading {}", args.policy.display()))?;
    let rules = extract_rules(&text, &TriggerLexicon::builtin(), &source_id(&args.policy));
    let stamp = Stamp::new("extract-rules", args.seed).path("policy", &args.policy);
    export_rules(&rules, &args.out, Some(&stamp.header()))?;
    println!(
        "extracted {} rules from {} into {}",
        rules.len(),
        args.policy.display(),
        args.out.display()
    );
    for kind in DeonticType::ALL {
        let count = rules.iter().filter(|r| r.deontic_type == kind).count();
        println!("  {kind:?}: {count}");
    }
    Ok(0)
}

#[derive(Args)]
pub struct ClassifyArgs {
    /// Dataset schema (JSON).
    #[arg(long)]
    pub schema: PathBuf,
    /// Previously extracted rules (JSON lines).
    #[arg(long, conflicts_with = "policy")]
    pub rules: Option<PathBuf>,
    /// Policy document to extract rules from on the fly.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    /// Tag keywords, overrides, bands and distortion settings.
    #[arg(long)]
    pub sensitivity_config: Option<PathBuf>,
    /// Destination for the sensitivity map (JSON lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Run seed, recorded in the output header.
    #[arg(long)]
    pub seed: u64,
}

pub fn classify_cmd(args: &ClassifyArgs) -> Result<u8> {
    let schema = Schema::load_config(&args.schema)?;
    let config = match &args.sensitivity_config {
        Some(path) => load_sensitivity_config(path)?,
        None => SensitivityConfig::default(),
    };
    let rules: Vec<DeonticRule> = match (&args.rules, &args.policy) {
        (Some(path), _) => import_rules(path)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            extract_rules(&text, &TriggerLexicon::builtin(), &source_id(path))
        }
        // No rules at all is legitimate: classification then falls back to
        // the per-attribute default, High.
        (None, None) => Vec::new(),
    };
    let map = classify_attributes(&schema, &rules, &config.tag_keywords, &config.overrides);
    let stamp = Stamp::new("classify", args.seed)
        .path("schema", &args.schema)
        .opt_path("rules", &args.rules)
        .opt_path("policy", &args.policy)
        .opt_path("sensitivity-config", &args.sensitivity_config);
    map.save(&args.out, Some(&stamp.header()))?;
    let histogram = map.histogram();
    println!(
        "classified {} attributes into {}",
        map.len(),
        args.out.display()
    );
    for level in SensitivityLevel::ALL {
        println!("  {}: {}", level.name(), histogram[&level]);
    }
    Ok(0)
}
