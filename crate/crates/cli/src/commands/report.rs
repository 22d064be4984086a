//! `evaluate` and `attack`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use polisynth_core::dataset::{load_table, split, ColumnKind, Table};
use polisynth_core::eval::{
    attribute_inference_attack, reidentification_attack, tstr, ClassifierKind, TrainSettings,
};
use polisynth_core::metrics::{
    cdf_points, column_comparable, column_distance_summary, pca_overlay, PcaProjection,
};
use polisynth_core::sensitivity::{SensitivityLevel, SensitivityMap};

use crate::commands::load_input;
use crate::provenance::Stamp;

/// Fraction of the real table held out as the shared test split; the
/// reference models train on the rest.
const TEST_FRACTION: f64 = 0.25;

#[derive(Args)]
pub struct EvaluateArgs {
    /// Real table (CSV).
    #[arg(long)]
    pub data: PathBuf,
    /// Synthetic table to evaluate (CSV).
    #[arg(long)]
    pub synth: PathBuf,
    /// Schema file; inferred from the real CSV when omitted.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Discrete column the downstream classifiers predict.
    #[arg(long)]
    pub target: String,
    /// Classifier kinds to score (lr, dt, rf, gbc).
    #[arg(long, value_delimiter = ',', default_value = "lr,dt,rf,gbc")]
    pub classifier: Vec<String>,
    /// Output directory for utility.jsonl, fidelity.jsonl, cdf_*.csv, pca.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for the train/test split and model training.
    #[arg(long)]
    pub seed: u64,
}

pub fn evaluate_cmd(args: &EvaluateArgs) -> Result<u8> {
    let real = load_input(&args.data, &args.schema)?;
    let synthetic = load_table(&args.synth, Some(real.schema.clone()))
        .with_context(|| format!("loading {}", args.synth.display()))?;
    let kinds = args
        .classifier
        .iter()
        .map(|name| ClassifierKind::from_name(name))
        .collect::<polisynth_core::Result<Vec<_>>>()?;

    let (train, test) = split(&real, TEST_FRACTION, args.seed)?;
    let settings = TrainSettings::new(args.seed);
    let utility = tstr(&train, &synthetic, &test, &args.target, &kinds, &settings)?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let stamp = Stamp::new("evaluate", args.seed)
        .path("data", &args.data)
        .path("synth", &args.synth)
        .opt_path("schema", &args.schema)
        .field("target", &args.target)
        .list("classifier", &args.classifier);
    let header = stamp.header();

    let mut out = String::new();
    writeln!(out, "# {header}").unwrap();
    let summary = serde_json::json!({
        "target": utility.target,
        "n_train_real": utility.n_train_real,
        "n_train_synthetic": utility.n_train_synthetic,
        "n_test": utility.n_test,
        "majority_rate": utility.majority_rate,
    });
    writeln!(out, "{summary}").unwrap();
    for score in &utility.scores {
        writeln!(out, "{}", serde_json::to_string(score)?).unwrap();
    }
    fs::write(args.out.join("utility.jsonl"), out)?;

    let mut fidelity = String::new();
    writeln!(fidelity, "# {header}").unwrap();
    let mut ks_sum = 0.0;
    let mut emd_sum = 0.0;
    let mut compared = 0usize;
    for column in &real.schema.columns {
        if !column_comparable(&real, &synthetic, &column.name) {
            continue;
        }
        let (ks, emd) = column_distance_summary(&real, &synthetic, &column.name)?;
        ks_sum += ks;
        emd_sum += emd;
        compared += 1;
        let line = serde_json::json!({
            "column": column.name,
            "kind": match column.kind {
                ColumnKind::Continuous => "continuous",
                ColumnKind::Discrete => "discrete",
            },
            "ks": ks,
            "normalized_emd": emd,
        });
        writeln!(fidelity, "{line}").unwrap();
    }
    fs::write(args.out.join("fidelity.jsonl"), fidelity)?;

    for column in &real.schema.columns {
        if column.kind != ColumnKind::Continuous
            || !column_comparable(&real, &synthetic, &column.name)
        {
            continue;
        }
        write_cdf_curves(&args.out, &real, &synthetic, &column.name, &header)?;
    }

    let (real_proj, synth_proj) = pca_overlay(&real, &synthetic)?;
    write_pca(&args.out.join("pca.csv"), &real_proj, &synth_proj, &header)?;

    println!(
        "utility on `{}` ({} test rows, majority rate {:.4}):",
        utility.target, utility.n_test, utility.majority_rate
    );
    for score in &utility.scores {
        println!(
            "  {:<4} real={:.4} synthetic={:.4} delta={:+.4}",
            score.kind, score.accuracy_real, score.accuracy_synthetic, score.delta
        );
    }
    if compared > 0 {
        println!(
            "fidelity over {} columns: mean ks={:.4}, mean normalized emd={:.4}",
            compared,
            ks_sum / compared as f64,
            emd_sum / compared as f64
        );
    }
    println!("reports written to {}", args.out.display());
    Ok(0)
}

/// Both empirical CDFs evaluated on the pooled value grid.
fn write_cdf_curves(
    dir: &Path,
    real: &Table,
    synthetic: &Table,
    column: &str,
    header: &str,
) -> Result<()> {
    let real_curve = cdf_points(&real.numbers(column)?)?;
    let synth_curve = cdf_points(&synthetic.numbers(column)?)?;
    let mut grid: Vec<f64> = real_curve
        .iter()
        .chain(&synth_curve)
        .map(|&(v, _)| v)
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    let mut out = String::new();
    writeln!(out, "# {header}").unwrap();
    writeln!(out, "value,real_cdf,synthetic_cdf").unwrap();
    let (mut i, mut j) = (0usize, 0usize);
    let (mut fr, mut fs) = (0.0f64, 0.0f64);
    for v in grid {
        while i < real_curve.len() && real_curve[i].0 <= v {
            fr = real_curve[i].1;
            i += 1;
        }
        while j < synth_curve.len() && synth_curve[j].0 <= v {
            fs = synth_curve[j].1;
            j += 1;
        }
        writeln!(out, "{v},{fr},{fs}").unwrap();
    }
    let safe: String = column
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    let path = dir.join(format!("cdf_{safe}.csv"));
    fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_pca(
    path: &Path,
    real: &PcaProjection,
    synthetic: &PcaProjection,
    header: &str,
) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# {header}").unwrap();
    writeln!(out, "source,pc1,pc2").unwrap();
    for point in &real.points {
        writeln!(out, "real,{},{}", point[0], point[1]).unwrap();
    }
    for point in &synthetic.points {
        writeln!(out, "synthetic,{},{}", point[0], point[1]).unwrap();
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackMode {
    /// Recover a hidden attribute from known columns via a model trained
    /// on the synthetic table.
    Inference,
    /// Link synthetic rows to real rows over quasi-identifiers.
    Reidentification,
}

#[derive(Args)]
pub struct AttackArgs {
    /// Real table (CSV).
    #[arg(long)]
    pub data: PathBuf,
    /// Synthetic release under attack (CSV).
    #[arg(long)]
    pub synth: PathBuf,
    /// Schema file; inferred from the real CSV when omitted.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Which attack to simulate.
    #[arg(long, value_enum)]
    pub attack: AttackMode,
    /// Hidden attribute the inference attack recovers.
    #[arg(long)]
    pub target: Option<String>,
    /// Columns the inference attacker already knows.
    #[arg(long, value_delimiter = ',')]
    pub known: Vec<String>,
    /// Quasi-identifier columns for re-identification.
    #[arg(long, value_delimiter = ',')]
    pub qi: Vec<String>,
    /// Sensitivity map; its High attributes become the sensitive set for
    /// re-identification. Without it, every non-identifier column counts.
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Disclosure tolerance for continuous values, in real standard
    /// deviations.
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    /// Classifier kind for the inference attack (lr, dt, rf, gbc).
    #[arg(long, default_value = "rf")]
    pub classifier: String,
    /// Destination for the attack report (JSON lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for training and baseline pairings.
    #[arg(long)]
    pub seed: u64,
}

pub fn attack_cmd(args: &AttackArgs) -> Result<u8> {
    let real = load_input(&args.data, &args.schema)?;
    let synthetic = load_table(&args.synth, Some(real.schema.clone()))
        .with_context(|| format!("loading {}", args.synth.display()))?;
    let stamp = Stamp::new("attack", args.seed)
        .path("data", &args.data)
        .path("synth", &args.synth)
        .opt_path("schema", &args.schema)
        .field(
            "attack",
            match args.attack {
                AttackMode::Inference => "inference",
                AttackMode::Reidentification => "reidentification",
            },
        )
        .opt("target", &args.target)
        .list("known", &args.known)
        .list("qi", &args.qi)
        .opt_path("map", &args.map)
        .field("delta", args.delta)
        .field("classifier", &args.classifier);

    let line = match args.attack {
        AttackMode::Inference => {
            let Some(target) = &args.target else {
                bail!("the inference attack requires --target");
            };
            if args.known.is_empty() {
                bail!("the inference attack requires --known");
            }
            let kind = ClassifierKind::from_name(&args.classifier)?;
            let report = attribute_inference_attack(
                &synthetic,
                &real,
                target,
                &args.known,
                kind,
                &TrainSettings::new(args.seed),
            )?;
            println!(
                "inference of `{}`: accuracy {:.4}, majority baseline {:.4}, {} rows",
                report.target, report.accuracy, report.baseline_majority_rate, report.n_eval
            );
            serde_json::to_string(&report)?
        }
        AttackMode::Reidentification => {
            if args.qi.is_empty() {
                bail!("the re-identification attack requires --qi");
            }
            let sensitive = sensitive_columns(&real, &args.qi, &args.map)?;
            let report = reidentification_attack(
                &synthetic,
                &real,
                &args.qi,
                &sensitive,
                args.delta,
                args.seed,
            )?;
            println!(
                "re-identification over {:?}: success {:.4}, random baseline {:.4}, {} rows",
                report.quasi_identifiers, report.success_rate, report.baseline_rate, report.n
            );
            serde_json::to_string(&report)?
        }
    };

    let mut out = String::new();
    writeln!(out, "# {}", stamp.header()).unwrap();
    writeln!(out, "{line}").unwrap();
    fs::write(&args.out, out).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(0)
}

/// Sensitive set for re-identification: High-tier attributes from the map
/// when one is given, otherwise every column outside the identifiers.
fn sensitive_columns(
    real: &Table,
    qi: &[String],
    map: &Option<PathBuf>,
) -> Result<Vec<String>> {
    let sensitive: Vec<String> = match map {
        Some(path) => SensitivityMap::load(path)?
            .iter()
            .filter(|(name, entry)| {
                entry.level == SensitivityLevel::High
                    && !qi.contains(name)
                    && real.schema.index_of(name).is_some()
            })
            .map(|(name, _)| name.clone())
            .collect(),
        None => real
            .schema
            .columns
            .iter()
            .map(|c| c.name.clone())
            .filter(|name| !qi.contains(name))
            .collect(),
    };
    if sensitive.is_empty() {
        bail!("no sensitive columns left to test");
    }
    Ok(sensitive)
}
