//! Built-in benchmark: a seeded farm survey generator.
//!
//! Twenty columns over four latent factors (farm scale, climate, input
//! intensity, capitalisation), so the table carries real cross-column
//! structure: several continuous columns are multi-modal, the discrete
//! columns are factor-driven, and `farmer_category` is a noisy linear
//! label over four of the continuous columns with roughly 95% achievable
//! accuracy. Tags mark three columns "public" and ten "pii"; the rest
//! carry no tag.

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataset::{mean_std, Column, ColumnKind, Schema, Table, Value};
use crate::rng::{self, label};

const REGIONS: [&str; 4] = ["east", "north", "south", "west"];
const CROPS: [&str; 5] = ["wheat", "maize", "potato", "rapeseed", "barley"];
const SOIL_CLASSES: [&str; 3] = ["acidic", "neutral", "alkaline"];
const SUBSIDIES: [&str; 3] = ["basic", "eco", "coupled"];
const COOP: [&str; 2] = ["independent", "member"];
const IRRIGATION: [&str; 3] = ["none", "drip", "sprinkler"];
const MACHINERY: [&str; 6] = ["m1", "m2", "m3", "m4", "m5", "m6"];

/// Label noise relative to the clean score's spread; keeps the best
/// reachable accuracy on `farmer_category` near 0.95.
const LABEL_NOISE: f64 = 0.158;

pub fn benchmark_schema() -> Schema {
    fn col(name: &str, kind: ColumnKind, tags: &[&str]) -> Column {
        Column {
            name: name.to_string(),
            kind,
            tags: tags.iter().map(|t| t.to_string()).collect(),
        }
    }
    let c = ColumnKind::Continuous;
    let d = ColumnKind::Discrete;
    Schema::new(vec![
        col("farm_area_ha", c, &["public"]),
        col("annual_yield_t", c, &["public"]),
        col("soil_ph", c, &[]),
        col("rainfall_mm", c, &[]),
        col("irrigation_hours", c, &[]),
        col("fertilizer_kg_ha", c, &["pii"]),
        col("pesticide_kg", c, &["pii"]),
        col("livestock_head", c, &["pii"]),
        col("feed_cost_eur", c, &["pii"]),
        col("equipment_value_eur", c, &["pii"]),
        col("fuel_usage_l", c, &["pii"]),
        col("labor_hours", c, &["pii"]),
        col("farmer_category", d, &["public"]),
        col("region", d, &["pii"]),
        col("crop_type", d, &[]),
        col("soil_class", d, &[]),
        col("subsidy_scheme", d, &["pii"]),
        col("coop_membership", d, &["pii"]),
        col("irrigation_type", d, &[]),
        col("machinery_class", d, &[]),
    ])
    .expect("benchmark schema is valid")
}

pub fn benchmark_table(n: usize, seed: u64) -> Table {
    let schema = benchmark_schema();
    let mut rng = rng::substream(seed, &[label::BENCHMARK]);
    let gauss = Normal::new(0.0, 1.0).unwrap();

    let mut rows: Vec<Vec<Value>> = Vec::with_capacity(n);
    // Columns that define the label, kept aside for the second pass.
    let mut areas = Vec::with_capacity(n);
    let mut yields = Vec::with_capacity(n);
    let mut feeds = Vec::with_capacity(n);
    let mut labors = Vec::with_capacity(n);
    let mut etas = Vec::with_capacity(n);

    for _ in 0..n {
        let f1: f64 = rng.sample(StandardNormal);
        let f2: f64 = rng.sample(StandardNormal);
        let f3: f64 = rng.sample(StandardNormal);
        let f4: f64 = rng.sample(StandardNormal);

        let area = pick(&mut rng, &[(0.65, 30.0), (0.35, 90.0)]) + 10.0 * f1 + 4.0 * e(&mut rng);
        let yield_t = 60.0 + 12.0 * f1 + 5.0 * f2 + 6.0 * e(&mut rng);
        let ph = pick(&mut rng, &[(0.3, 5.8), (0.5, 6.8), (0.2, 7.5)])
            + 0.2 * f2
            + 0.15 * e(&mut rng);
        let rain =
            pick(&mut rng, &[(0.5, 450.0), (0.5, 800.0)]) + 60.0 * f2 + 40.0 * e(&mut rng);
        let irrigation = 150.0 + 40.0 * f3 - 25.0 * f2 + 20.0 * e(&mut rng);
        let fertilizer =
            pick(&mut rng, &[(0.6, 80.0), (0.4, 180.0)]) + 25.0 * f3 + 15.0 * e(&mut rng);
        let pesticide = 35.0 + 12.0 * f3 + 6.0 * e(&mut rng);
        let livestock = pick(&mut rng, &[(0.5, 15.0), (0.3, 60.0), (0.2, 140.0)])
            + 12.0 * f1
            + 8.0 * e(&mut rng);
        let feed = 5000.0 + 1800.0 * f1 + 900.0 * f4 + 700.0 * e(&mut rng);
        let equipment = pick(&mut rng, &[(0.6, 40_000.0), (0.4, 110_000.0)])
            + 15_000.0 * f4
            + 8_000.0 * e(&mut rng);
        let fuel = 2200.0 + 600.0 * f1 + 300.0 * f3 + 250.0 * e(&mut rng);
        let labor = 1600.0 + 350.0 * f1 - 200.0 * f4 + 180.0 * e(&mut rng);

        let region = REGIONS[bucket(
            gauss.cdf((f2 + 0.5 * e(&mut rng)) / 1.25f64.sqrt()),
            &[0.25, 0.5, 0.75],
        )];
        let crop = CROPS[bucket(
            gauss.cdf((f3 + e(&mut rng)) / 2.0f64.sqrt()),
            &[0.3, 0.55, 0.75, 0.9],
        )];
        let soil = flip(&mut rng, 0.1, &SOIL_CLASSES, {
            if ph < 6.2 {
                0
            } else if ph <= 7.1 {
                1
            } else {
                2
            }
        });
        let subsidy = SUBSIDIES[bucket(
            gauss.cdf((f4 + 0.8 * e(&mut rng)) / 1.64f64.sqrt()),
            &[0.5, 0.8],
        )];
        let coop = if rng.random::<f64>() < sigmoid(0.8 * f1) {
            COOP[1]
        } else {
            COOP[0]
        };
        let irrigation_kind = flip(&mut rng, 0.1, &IRRIGATION, {
            if irrigation < 130.0 {
                0
            } else if irrigation < 180.0 {
                1
            } else {
                2
            }
        });
        let machinery = MACHINERY[bucket(
            gauss.cdf(((f4 + f1) / 2.0f64.sqrt() + 0.6 * e(&mut rng)) / 1.36f64.sqrt()),
            &[0.25, 0.45, 0.65, 0.8, 0.92],
        )];
        etas.push(e(&mut rng));

        areas.push(area);
        yields.push(yield_t);
        feeds.push(feed);
        labors.push(labor);
        rows.push(vec![
            Value::Number(area),
            Value::Number(yield_t),
            Value::Number(ph),
            Value::Number(rain),
            Value::Number(irrigation),
            Value::Number(fertilizer),
            Value::Number(pesticide),
            Value::Number(livestock),
            Value::Number(feed),
            Value::Number(equipment),
            Value::Number(fuel),
            Value::Number(labor),
            Value::Missing,
            Value::Category(region.to_string()),
            Value::Category(crop.to_string()),
            Value::Category(soil.to_string()),
            Value::Category(subsidy.to_string()),
            Value::Category(coop.to_string()),
            Value::Category(irrigation_kind.to_string()),
            Value::Category(machinery.to_string()),
        ]);
    }

    // Label pass: a linear score over four standardised columns plus
    // calibrated noise, split at zero.
    let stats: Vec<(f64, f64)> = [&areas, &yields, &feeds, &labors]
        .iter()
        .map(|col| mean_std(col))
        .collect();
    let weights = [0.62, 0.62, 0.33, 0.33];
    let scores: Vec<f64> = (0..n)
        .map(|i| {
            let drivers = [areas[i], yields[i], feeds[i], labors[i]];
            drivers
                .iter()
                .zip(&stats)
                .zip(&weights)
                .map(|((v, (mean, std)), w)| w * (v - mean) / std.max(1e-12))
                .sum()
        })
        .collect();
    let (_, score_spread) = mean_std(&scores);
    for i in 0..n {
        let noisy = scores[i] + LABEL_NOISE * score_spread * etas[i];
        let category = if noisy > 0.0 { "commercial" } else { "smallholder" };
        rows[i][12] = Value::Category(category.to_string());
    }

    Table::new(schema, rows).expect("benchmark rows match the schema")
}

fn e(rng: &mut rng::RngStream) -> f64 {
    rng.sample(StandardNormal)
}

/// Picks a value from `(weight, value)` entries; weights sum to one.
fn pick(rng: &mut rng::RngStream, weighted: &[(f64, f64)]) -> f64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(w, v) in weighted {
        acc += w;
        if u < acc {
            return v;
        }
    }
    weighted.last().expect("non-empty mode list").1
}

/// Index of the first cut above `u`, or the last bucket.
fn bucket(u: f64, cuts: &[f64]) -> usize {
    cuts.iter().position(|&c| u < c).unwrap_or(cuts.len())
}

/// Keeps `preferred` with probability `1 - p`, otherwise a uniform draw.
fn flip<'a>(rng: &mut rng::RngStream, p: f64, options: &[&'a str], preferred: usize) -> &'a str {
    if rng.random::<f64>() < p {
        options[rng.random_range(0..options.len())]
    } else {
        options[preferred]
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
