//! Acceptance gate: ten end-to-end checks over the whole pipeline. Each
//! test prints a single PASS/FAIL line with the measured quantities, and
//! fails the build when its criterion is not met.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use polisynth_core::benchmark::{benchmark_schema, benchmark_table};
use polisynth_core::dataset::{save_table, split};
use polisynth_core::eval::{
    attribute_inference_attack, reidentification_attack, tstr, ClassifierKind, TrainSettings,
};
use polisynth_core::metrics::{
    column_distance_summary, emd_1d, emd_categorical, normalized_column_emd,
};
use polisynth_core::policy::{extract_rules, DeonticType, TriggerLexicon};
use polisynth_core::rng::{substream, RngStream};
use polisynth_core::sensitivity::{
    classify_attributes, privacy_bands, BandConfig, Provenance, SensitivityLevel,
};
use polisynth_core::synth::{
    fit_gmm_traced, generate_enforced, DistortionConfig, EnforcementStatus, TabularModel,
    DEFAULT_MAX_ITERS,
};

fn check(label: &str, ok: bool, detail: String) {
    println!("{} {label}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{label}: {detail}");
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[test]
fn criterion_01_bundled_policy_yields_six_rules_in_order() {
    let text = common::bundled_policy_text();
    let lexicon = TriggerLexicon::builtin();
    let start = Instant::now();
    let rules = extract_rules(&text, &lexicon, "eu_code_excerpt");
    let elapsed = start.elapsed();
    let got: Vec<(&str, DeonticType)> = rules
        .iter()
        .map(|r| (r.trigger.as_str(), r.deontic_type))
        .collect();
    let expected = vec![
        ("can", DeonticType::Permission),
        ("can", DeonticType::Permission),
        ("must not", DeonticType::Prohibition),
        ("may not", DeonticType::Prohibition),
        ("cannot", DeonticType::Prohibition),
        ("may not", DeonticType::Prohibition),
    ];
    check(
        "01 bundled excerpt yields six typed rules in document order",
        got == expected && elapsed < Duration::from_secs(1),
        format!("{} rules in {elapsed:?}", rules.len()),
    );
}

#[test]
fn criterion_02_sweep_emd_matches_an_exact_transport_solver() {
    let mut rng = RngStream::seed_from_u64(0xC2);
    let start = Instant::now();
    let mut worst_line = 0.0f64;
    for _ in 0..1000 {
        let na = rng.random_range(1..=8);
        let nb = rng.random_range(1..=8);
        let a: Vec<f64> = (0..na).map(|_| rng.random_range(-5.0..5.0)).collect();
        let b: Vec<f64> = (0..nb).map(|_| rng.random_range(-5.0..5.0)).collect();
        let fast = emd_1d(&a, &b).unwrap();
        let oracle = common::transport_distance(&a, &b);
        worst_line = worst_line.max((fast - oracle).abs());
    }
    let mut worst_cat = 0.0f64;
    let categories = ["a", "b", "c", "d", "e", "f", "g", "h"];
    for _ in 0..1000 {
        let draw = |rng: &mut RngStream| -> BTreeMap<String, f64> {
            let k = rng.random_range(1..=categories.len());
            let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
            let total: f64 = weights.iter().sum();
            categories[..k]
                .iter()
                .zip(&weights)
                .map(|(name, w)| (name.to_string(), w / total))
                .collect()
        };
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let fast = emd_categorical(&a, &b).unwrap();
        let oracle = common::unit_cost_transport(&a, &b);
        worst_cat = worst_cat.max((fast - oracle).abs());
    }
    let elapsed = start.elapsed();
    check(
        "02 both distance sweeps equal min-cost transport",
        worst_line <= 1e-9 && worst_cat <= 1e-9 && elapsed < Duration::from_secs(30),
        format!(
            "max deviation {worst_line:.3e} continuous, {worst_cat:.3e} categorical, 1000 pairs each in {elapsed:?}"
        ),
    );
}

#[test]
fn criterion_03_em_likelihood_never_decreases() {
    let mut worst_drop = f64::NEG_INFINITY;
    let mut trajectories = 0usize;
    for case in 0..200u64 {
        let mut data_rng = RngStream::seed_from_u64(3_000 + case);
        let k = data_rng.random_range(1..=3usize);
        let n = data_rng.random_range(30..=400usize);
        let means: Vec<f64> = (0..k).map(|_| data_rng.random_range(-5.0..5.0)).collect();
        let stds: Vec<f64> = (0..k).map(|_| data_rng.random_range(0.1..1.5)).collect();
        let values: Vec<f64> = (0..n)
            .map(|_| {
                let c = data_rng.random_range(0..k);
                let z: f64 = data_rng.sample(StandardNormal);
                means[c] + stds[c] * z
            })
            .collect();
        let mut fit_rng = substream(900, &[case]);
        let (_, trace) = fit_gmm_traced(&values, &mut fit_rng).unwrap();
        for candidate in &trace.candidates {
            trajectories += 1;
            for w in candidate.log_likelihoods.windows(2) {
                worst_drop = worst_drop.max(w[0] - w[1]);
            }
        }
    }
    check(
        "03 every EM trajectory is monotone",
        worst_drop <= 1e-9,
        format!("largest drop {worst_drop:.3e} across {trajectories} trajectories"),
    );
}

#[test]
fn criterion_04_low_bands_accept_a_faithful_sample() {
    let start = Instant::now();
    let real = benchmark_table(5000, 42);
    let model = TabularModel::fit(&real, 42).unwrap();
    let map = common::all_low_map(&real.schema);
    let bands = privacy_bands(&map, &BandConfig::default()).unwrap();
    let (synthetic, report) = generate_enforced(
        &model,
        &real,
        &map,
        &bands,
        &DistortionConfig::default(),
        5000,
        42,
        DEFAULT_MAX_ITERS,
    )
    .unwrap();
    let mut ks_sum = 0.0;
    let mut emd_sum = 0.0;
    for column in &real.schema.columns {
        let (ks, emd) = column_distance_summary(&real, &synthetic, &column.name).unwrap();
        ks_sum += ks;
        emd_sum += emd;
    }
    let n_cols = real.schema.columns.len() as f64;
    let (mean_ks, mean_emd) = (ks_sum / n_cols, emd_sum / n_cols);
    let elapsed = start.elapsed();
    check(
        "04 all-Low bands accept with tight marginals",
        report.all_accepted
            && mean_ks <= 0.05
            && mean_emd <= 0.05
            && elapsed < Duration::from_secs(120),
        format!(
            "accepted={} mean_ks={mean_ks:.4} mean_emd={mean_emd:.4} in {elapsed:?}",
            report.all_accepted
        ),
    );
}

#[test]
fn criterion_05_enforcement_reports_match_recomputation() {
    let real = benchmark_table(2000, 42);
    let configs = [
        ("mixed-tier", common::benchmark_map(&real.schema)),
        ("all-low", common::all_low_map(&real.schema)),
    ];
    let mut agree = 0usize;
    let mut total = 0usize;
    let mut accepted = 0usize;
    for (_, map) in &configs {
        let model = TabularModel::fit(&real, 7).unwrap();
        let bands = privacy_bands(map, &BandConfig::default()).unwrap();
        let (synthetic, report) = generate_enforced(
            &model,
            &real,
            map,
            &bands,
            &DistortionConfig::default(),
            2000,
            7,
            DEFAULT_MAX_ITERS,
        )
        .unwrap();
        for attr in &report.attributes {
            total += 1;
            let recomputed = normalized_column_emd(&real, &synthetic, &attr.attribute).unwrap();
            let expected_status = if attr.band.contains(recomputed) {
                EnforcementStatus::Accepted
            } else {
                EnforcementStatus::Failed
            };
            if recomputed == attr.final_emd && expected_status == attr.status {
                agree += 1;
            }
            if attr.status == EnforcementStatus::Accepted {
                accepted += 1;
            }
        }
    }
    check(
        "05 reported final distances and statuses recompute exactly",
        agree == total && total > 0,
        format!("{agree}/{total} attributes agree across 2 runs ({accepted} accepted)"),
    );
}

#[test]
fn criterion_06_downstream_utility_survives_enforcement() {
    let start = Instant::now();
    let real = benchmark_table(5000, 42);
    // A quarter of the rows are held out; models train on the rest.
    let (train, test) = split(&real, 0.25, 42).unwrap();
    let map = common::benchmark_map(&real.schema);
    let bands = privacy_bands(&map, &BandConfig::default()).unwrap();
    let mut rf_real = Vec::new();
    let mut rf_delta = Vec::new();
    let mut all_kinds = true;
    for seed in 1..=5u64 {
        let model = TabularModel::fit(&train, seed).unwrap();
        let (enforced, _) = generate_enforced(
            &model,
            &train,
            &map,
            &bands,
            &DistortionConfig::default(),
            train.n_rows(),
            seed,
            DEFAULT_MAX_ITERS,
        )
        .unwrap();
        let report = tstr(
            &train,
            &enforced,
            &test,
            "farmer_category",
            &ClassifierKind::ALL,
            &TrainSettings::new(seed),
        )
        .unwrap();
        all_kinds &= report.scores.len() == ClassifierKind::ALL.len();
        let rf = report.scores.iter().find(|s| s.kind == "rf").unwrap();
        rf_real.push(rf.accuracy_real);
        rf_delta.push(rf.delta);
    }
    let (mean_real, mean_delta) = (mean(&rf_real), mean(&rf_delta));
    let elapsed = start.elapsed();
    check(
        "06 forest accuracy holds and the synthetic gap stays small",
        mean_real >= 0.90
            && mean_delta <= 0.10
            && all_kinds
            && elapsed < Duration::from_secs(600),
        format!(
            "mean real accuracy {mean_real:.4}, mean gap {mean_delta:+.4}, 5 seeds in {elapsed:?}"
        ),
    );
}

#[test]
fn criterion_07_enforcement_reduces_attack_success() {
    let real = benchmark_table(3000, 42);
    let map = common::benchmark_map(&real.schema);
    let bands = privacy_bands(&map, &BandConfig::default()).unwrap();
    let public = [
        "farm_area_ha".to_string(),
        "annual_yield_t".to_string(),
        "farmer_category".to_string(),
    ];
    let sensitive = ["feed_cost_eur".to_string(), "coop_membership".to_string()];
    let mut inference = (Vec::new(), Vec::new());
    let mut reid = (Vec::new(), Vec::new());
    for seed in 0..10u64 {
        let model = TabularModel::fit(&real, seed).unwrap();
        let plain = model.sample(3000, seed).unwrap();
        let (enforced, _) = generate_enforced(
            &model,
            &real,
            &map,
            &bands,
            &DistortionConfig::default(),
            3000,
            seed,
            DEFAULT_MAX_ITERS,
        )
        .unwrap();
        let settings = TrainSettings::new(seed);
        for (table, bucket) in [(&plain, &mut inference.0), (&enforced, &mut inference.1)] {
            let report = attribute_inference_attack(
                table,
                &real,
                "coop_membership",
                &public,
                ClassifierKind::DecisionTree,
                &settings,
            )
            .unwrap();
            bucket.push(report.accuracy);
        }
        for (table, bucket) in [(&plain, &mut reid.0), (&enforced, &mut reid.1)] {
            let report =
                reidentification_attack(table, &real, &public, &sensitive, 0.25, seed).unwrap();
            bucket.push(report.success_rate);
        }
    }
    let gaps = |pair: &(Vec<f64>, Vec<f64>)| -> Vec<String> {
        pair.0
            .iter()
            .zip(&pair.1)
            .map(|(plain, enforced)| format!("{:+.3}", enforced - plain))
            .collect()
    };
    let (ip, ie) = (mean(&inference.0), mean(&inference.1));
    let (rp, re) = (mean(&reid.0), mean(&reid.1));
    check(
        "07 enforced release attacks no better than the plain release",
        ie <= ip && re <= rp,
        format!(
            "inference {ip:.4} -> {ie:.4}, per-seed gaps [{}]; re-identification {rp:.4} -> {re:.4}, per-seed gaps [{}]",
            gaps(&inference).join(" "),
            gaps(&reid).join(" ")
        ),
    );
}

#[test]
fn criterion_08_synthesize_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("real.csv");
    save_table(&benchmark_table(400, 3), &data, None).unwrap();
    let run = |out: &Path| {
        Command::new(env!("CARGO_BIN_EXE_polisynth"))
            .arg("synthesize")
            .arg("--data")
            .arg(&data)
            .args(["--n", "400", "--seed", "11", "--max-iters", "6"])
            .arg("--out")
            .arg(out)
            .output()
            .expect("binary runs")
    };
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    let r1 = run(&out1);
    let r2 = run(&out2);
    let mut identical = r1.status.code() == r2.status.code();
    let mut bytes = 0usize;
    for file in ["synthetic.csv", "model.json", "enforcement.jsonl"] {
        let a = fs::read(out1.join(file)).expect(file);
        let b = fs::read(out2.join(file)).expect(file);
        identical &= a == b;
        bytes += a.len();
    }
    check(
        "08 repeated synthesize runs emit identical bytes",
        identical,
        format!(
            "exit={:?}, {bytes} bytes compared across three files",
            r1.status.code()
        ),
    );
}

#[test]
fn criterion_09_without_configuration_everything_is_high() {
    let map = classify_attributes(
        &benchmark_schema(),
        &[],
        &BTreeMap::new(),
        &BTreeMap::new(),
    );
    let all_high = map.iter().all(|(_, entry)| {
        entry.level == SensitivityLevel::High && matches!(entry.provenance, Provenance::Default)
    });
    check(
        "09 empty rules, tags and overrides classify everything High",
        all_high && map.len() == benchmark_schema().len(),
        format!("{}/{} attributes High by default", map.len(), benchmark_schema().len()),
    );
}

#[test]
fn criterion_10_overlay_files_show_coinciding_clouds() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let output = Command::new(env!("CARGO_BIN_EXE_polisynth"))
            .args(args)
            .output()
            .expect("binary runs");
        assert_eq!(output.status.code(), Some(0), "{args:?}: {output:?}");
    };
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();
    run(&["benchmark", "--n", "5000", "--out", &path(""), "--seed", "42"]);

    let mut config = String::from("[overrides]\n");
    for column in &benchmark_schema().columns {
        config.push_str(&format!("{} = Low\n", column.name));
    }
    fs::write(dir.path().join("all_low.cfg"), config).unwrap();

    run(&[
        "synthesize",
        "--data",
        &path("benchmark.csv"),
        "--schema",
        &path("benchmark_schema.json"),
        "--sensitivity-config",
        &path("all_low.cfg"),
        "--n",
        "5000",
        "--out",
        &path("release"),
        "--seed",
        "42",
    ]);
    run(&[
        "evaluate",
        "--data",
        &path("benchmark.csv"),
        "--synth",
        &path("release/synthetic.csv"),
        "--schema",
        &path("benchmark_schema.json"),
        "--target",
        "farmer_category",
        "--classifier",
        "lr",
        "--out",
        &path("eval"),
        "--seed",
        "42",
    ]);

    let overlay = fs::read_to_string(dir.path().join("eval/pca.csv")).expect("pca.csv written");
    let mut sums = BTreeMap::<String, ([f64; 2], usize)>::new();
    for line in overlay.lines().skip(2) {
        let mut parts = line.split(',');
        let source = parts.next().unwrap().to_string();
        let pc1: f64 = parts.next().unwrap().parse().unwrap();
        let pc2: f64 = parts.next().unwrap().parse().unwrap();
        let (sum, count) = sums.entry(source).or_default();
        sum[0] += pc1;
        sum[1] += pc2;
        *count += 1;
    }
    let centroid = |source: &str| -> [f64; 2] {
        let (sum, count) = &sums[source];
        [sum[0] / *count as f64, sum[1] / *count as f64]
    };
    let rc = centroid("real");
    let sc = centroid("synthetic");
    let dist = ((rc[0] - sc[0]).powi(2) + (rc[1] - sc[1]).powi(2)).sqrt();
    check(
        "10 overlay files written and projected centroids coincide",
        dist <= 0.1 && sums["real"].1 == 5000 && sums["synthetic"].1 == 5000,
        format!("centroid distance {dist:.4} from eval/pca.csv"),
    );
}
