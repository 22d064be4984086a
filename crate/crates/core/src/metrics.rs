//! Distribution distances and projections used for fidelity checks and
//! acceptance-band enforcement.
//!
//! The 1-D earth mover's distance is computed exactly: for sorted samples it
//! equals the integral of the absolute difference between the two empirical
//! CDFs, evaluated piecewise between consecutive pooled sample points. The
//! categorical counterpart is total variation distance, the minimal mass
//! that has to move when every move between distinct categories costs one.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::dataset::{ColumnKind, Table, Value};
use crate::encode::FeatureEncoder;
use crate::error::{Error, Result};

/// Exact earth mover's distance between two 1-D samples.
pub fn emd_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    check_samples("emd_1d", a, b)?;
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());

    // Sweep the pooled support once, integrating |F_a - F_b| over each gap.
    let mut i = 0;
    let mut j = 0;
    let mut distance = 0.0;
    let mut prev = f64::NAN;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        if !prev.is_nan() && x > prev {
            let fa = i as f64 / a.len() as f64;
            let fb = j as f64 / b.len() as f64;
            distance += (fa - fb).abs() * (x - prev);
        }
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        prev = x;
    }
    Ok(distance)
}

/// Total variation distance between two categorical frequency maps.
/// Frequencies must each sum to one; missing keys count as zero.
pub fn emd_categorical(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> Result<f64> {
    for (name, freqs) in [("first", a), ("second", b)] {
        let total: f64 = freqs.values().sum();
        if freqs.values().any(|&f| !f.is_finite() || f < 0.0) || (total - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "emd_categorical: {name} frequency map does not sum to 1 (got {total})"
            )));
        }
    }
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let total: f64 = keys
        .iter()
        .map(|key| {
            let fa = a.get(*key).copied().unwrap_or(0.0);
            let fb = b.get(*key).copied().unwrap_or(0.0);
            (fa - fb).abs()
        })
        .sum();
    Ok(total / 2.0)
}

/// Kolmogorov-Smirnov statistic between two 1-D samples: the maximum
/// absolute difference between their empirical CDFs.
pub fn ks_stat(a: &[f64], b: &[f64]) -> Result<f64> {
    check_samples("ks_stat", a, b)?;
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut i = 0;
    let mut j = 0;
    let mut max_diff = 0.0f64;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        let fa = i as f64 / a.len() as f64;
        let fb = j as f64 / b.len() as f64;
        max_diff = max_diff.max((fa - fb).abs());
    }
    Ok(max_diff)
}

/// Empirical CDF evaluated at the sample's own distinct points, suitable
/// for plotting step functions. Ties collapse into a single point.
pub fn cdf_points(sample: &[f64]) -> Result<Vec<(f64, f64)>> {
    if sample.is_empty() {
        return Err(Error::invalid("cdf_points: empty sample"));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("cdf_points: non-finite sample value"));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = sorted.len() as f64;
    let mut points = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        while i < sorted.len() && sorted[i] == x {
            i += 1;
        }
        points.push((x, i as f64 / n));
    }
    Ok(points)
}

/// KS statistic for discrete columns: the maximum cumulative frequency
/// difference with categories accumulated in lexicographic order.
pub fn ks_categorical(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut cum_a = 0.0;
    let mut cum_b = 0.0;
    let mut max_diff = 0.0f64;
    for key in keys {
        cum_a += a.get(key).copied().unwrap_or(0.0);
        cum_b += b.get(key).copied().unwrap_or(0.0);
        max_diff = max_diff.max((cum_a - cum_b).abs());
    }
    max_diff
}

/// Normalized per-column distance in `[0, 1]` between the same column of
/// two tables. Continuous columns use EMD divided by the reference column's
/// value range (clamped to 1); discrete columns use total variation, which
/// is already normalized. The reference table supplies the range so the
/// scale does not drift while a synthesizer is being adjusted.
pub fn normalized_column_emd(reference: &Table, other: &Table, column: &str) -> Result<f64> {
    let idx = reference.schema.require(column)?;
    other.schema.require(column)?;
    match reference.schema.columns[idx].kind {
        ColumnKind::Continuous => {
            let a = reference.numbers(column)?;
            let b = other.numbers(column)?;
            let raw = emd_1d(&a, &b)?;
            let min = a.iter().copied().fold(f64::INFINITY, f64::min);
            let max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let range = max - min;
            if range <= 0.0 {
                // Degenerate reference column: any difference saturates.
                return Ok(if raw == 0.0 { 0.0 } else { 1.0 });
            }
            Ok((raw / range).min(1.0))
        }
        ColumnKind::Discrete => {
            let a = reference.freqs(column)?;
            let b = other.freqs(column)?;
            emd_categorical(&a, &b)
        }
    }
}

/// Result of projecting one table onto a fixed 2-D principal-component
/// basis.
#[derive(Debug, Clone)]
pub struct PcaProjection {
    pub points: Vec<[f64; 2]>,
}

/// Principal-component basis fitted on one encoded table.
#[derive(Debug, Clone)]
pub struct PcaBasis {
    encoder: FeatureEncoder,
    components: Vec<Vec<f64>>,
}

impl PcaBasis {
    /// Fits a 2-component basis on the table: encode, center, eigendecompose
    /// the covariance. Component signs are canonicalized so the entry of
    /// largest magnitude is positive.
    pub fn fit(table: &Table) -> Result<PcaBasis> {
        let encoder = FeatureEncoder::fit(&table.schema, table, &[])?;
        let rows = encoder.encode_table(table)?;
        let n = rows.len();
        let d = encoder.width();
        if n < 2 || d == 0 {
            return Err(Error::invalid(
                "pca: need at least two rows and one feature",
            ));
        }
        let mut means = vec![0.0; d];
        for row in &rows {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        let mut cov = DMatrix::zeros(d, d);
        for row in &rows {
            for i in 0..d {
                for j in i..d {
                    let v = (row[i] - means[i]) * (row[j] - means[j]);
                    cov[(i, j)] += v;
                }
            }
        }
        for i in 0..d {
            for j in i..d {
                let v = cov[(i, j)] / (n - 1) as f64;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        let eigen = SymmetricEigen::new(cov);
        let eigenvalues: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| {
            eigenvalues[j]
                .partial_cmp(&eigenvalues[i])
                .unwrap()
                .then(i.cmp(&j))
        });
        let k = 2.min(d);
        let mut components = Vec::with_capacity(k);
        for &col in order.iter().take(k) {
            let mut component: Vec<f64> = (0..d).map(|r| eigen.eigenvectors[(r, col)]).collect();
            let lead = component
                .iter()
                .cloned()
                .max_by(|x, y| x.abs().partial_cmp(&y.abs()).unwrap())
                .unwrap_or(1.0);
            if lead < 0.0 {
                for v in &mut component {
                    *v = -*v;
                }
            }
            components.push(component);
        }
        while components.len() < 2 {
            components.push(vec![0.0; d]);
        }
        Ok(PcaBasis { encoder, components })
    }

    pub fn project(&self, table: &Table) -> Result<PcaProjection> {
        let rows = self.encoder.encode_table(table)?;
        let points = rows
            .iter()
            .map(|row| {
                let mut point = [0.0; 2];
                for (axis, component) in self.components.iter().enumerate() {
                    point[axis] = row.iter().zip(component).map(|(v, c)| v * c).sum();
                }
                point
            })
            .collect();
        Ok(PcaProjection { points })
    }
}

/// Projects both tables onto the basis fitted from the first. Returns the
/// two point clouds in the same coordinate system.
pub fn pca_overlay(real: &Table, synthetic: &Table) -> Result<(PcaProjection, PcaProjection)> {
    let basis = PcaBasis::fit(real)?;
    Ok((basis.project(real)?, basis.project(synthetic)?))
}

/// Mean point of a projection, used to compare cloud positions.
pub fn projection_centroid(projection: &PcaProjection) -> [f64; 2] {
    let n = projection.points.len().max(1) as f64;
    let mut centroid = [0.0; 2];
    for point in &projection.points {
        centroid[0] += point[0] / n;
        centroid[1] += point[1] / n;
    }
    centroid
}

fn check_samples(what: &str, a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid(format!("{what}: empty sample")));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("{what}: non-finite sample value")));
    }
    Ok(())
}

/// Extracts one column from a table as either numbers or category
/// frequencies and measures its normalized distance against another table.
/// Missing values are skipped on both sides.
pub fn column_distance_summary(
    reference: &Table,
    other: &Table,
    column: &str,
) -> Result<(f64, f64)> {
    let idx = reference.schema.require(column)?;
    match reference.schema.columns[idx].kind {
        ColumnKind::Continuous => {
            let a = reference.numbers(column)?;
            let b = other.numbers(column)?;
            Ok((ks_stat(&a, &b)?, normalized_column_emd(reference, other, column)?))
        }
        ColumnKind::Discrete => {
            let a = reference.freqs(column)?;
            let b = other.freqs(column)?;
            Ok((
                ks_categorical(&a, &b),
                normalized_column_emd(reference, other, column)?,
            ))
        }
    }
}

/// True when a column has at least one observed value in both tables, which
/// the distance functions require.
pub fn column_comparable(reference: &Table, other: &Table, column: &str) -> bool {
    let observed = |table: &Table| {
        table
            .schema
            .index_of(column)
            .map(|idx| table.rows.iter().any(|row| !matches!(row[idx], Value::Missing)))
            .unwrap_or(false)
    };
    observed(reference) && observed(other)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn freqs(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn emd_matches_hand_computed_values() {
        // Single unit of mass shifted by 2.
        assert!((emd_1d(&[0.0], &[2.0]).unwrap() - 2.0).abs() < 1e-12);
        // Quarter of the mass moves one unit: {0,0,1,1} vs {0,1,1,1}.
        let d = emd_1d(&[0.0, 0.0, 1.0, 1.0], &[0.0, 1.0, 1.0, 1.0]).unwrap();
        assert!((d - 0.25).abs() < 1e-12);
        // Uniform grids offset by half a step.
        let a: Vec<f64> = (0..4).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..4).map(|i| i as f64 + 0.5).collect();
        assert!((emd_1d(&a, &b).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn emd_handles_different_sample_sizes() {
        // {0} vs {0,1}: half the mass moves one unit.
        let d = emd_1d(&[0.0], &[0.0, 1.0]).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn categorical_emd_is_total_variation() {
        let a = freqs(&[("x", 0.5), ("y", 0.5)]);
        let b = freqs(&[("x", 0.25), ("y", 0.25), ("z", 0.5)]);
        assert!((emd_categorical(&a, &b).unwrap() - 0.5).abs() < 1e-12);
        assert!(emd_categorical(&a, &a).unwrap().abs() < 1e-12);
    }

    #[test]
    fn categorical_emd_rejects_non_distributions() {
        let a = freqs(&[("x", 0.7)]);
        let b = freqs(&[("x", 1.0)]);
        assert!(emd_categorical(&a, &b).is_err());
    }

    #[test]
    fn ks_matches_hand_computed_values() {
        let d = ks_stat(&[0.0, 0.0, 1.0, 1.0], &[0.0, 1.0, 1.0, 1.0]).unwrap();
        assert!((d - 0.25).abs() < 1e-12);
        assert!(ks_stat(&[1.0, 2.0], &[1.0, 2.0]).unwrap().abs() < 1e-12);
        // Disjoint supports separate completely.
        assert!((ks_stat(&[0.0, 0.1], &[5.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ks_categorical_uses_lexicographic_cumulatives() {
        let a = freqs(&[("a", 0.5), ("b", 0.5)]);
        let b = freqs(&[("a", 0.25), ("b", 0.75)]);
        assert!((ks_categorical(&a, &b) - 0.25).abs() < 1e-12);
        assert!(ks_categorical(&a, &a).abs() < 1e-12);
    }

    #[test]
    fn cdf_points_collapse_ties_and_end_at_one() {
        let points = cdf_points(&[2.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(points.len(), 3);
        assert_eq!(points[0], (1.0, 0.25));
        assert_eq!(points[1], (2.0, 0.75));
        assert_eq!(points[2], (3.0, 1.0));
    }

    #[test]
    fn empty_samples_are_rejected() {
        assert!(emd_1d(&[], &[1.0]).is_err());
        assert!(ks_stat(&[1.0], &[]).is_err());
        assert!(cdf_points(&[]).is_err());
        assert!(emd_1d(&[f64::NAN], &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn emd_is_symmetric(
            a in proptest::collection::vec(-50.0..50.0f64, 1..40),
            b in proptest::collection::vec(-50.0..50.0f64, 1..40),
        ) {
            let d1 = emd_1d(&a, &b).unwrap();
            let d2 = emd_1d(&b, &a).unwrap();
            prop_assert!((d1 - d2).abs() < 1e-9);
            prop_assert!(d1 >= 0.0);
        }

        #[test]
        fn emd_is_zero_on_identical_samples(
            a in proptest::collection::vec(-50.0..50.0f64, 1..40),
        ) {
            prop_assert!(emd_1d(&a, &a).unwrap().abs() < 1e-12);
        }

        #[test]
        fn emd_satisfies_triangle_inequality(
            a in proptest::collection::vec(-20.0..20.0f64, 4..12),
            b in proptest::collection::vec(-20.0..20.0f64, 4..12),
            c in proptest::collection::vec(-20.0..20.0f64, 4..12),
        ) {
            // Equal sizes keep the coupling argument exact.
            let n = a.len().min(b.len()).min(c.len());
            let (a, b, c) = (&a[..n], &b[..n], &c[..n]);
            let ab = emd_1d(a, b).unwrap();
            let bc = emd_1d(b, c).unwrap();
            let ac = emd_1d(a, c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-9);
        }

        #[test]
        fn emd_scales_with_translation(
            a in proptest::collection::vec(-10.0..10.0f64, 1..30),
            shift in 0.1..5.0f64,
        ) {
            let shifted: Vec<f64> = a.iter().map(|v| v + shift).collect();
            let d = emd_1d(&a, &shifted).unwrap();
            prop_assert!((d - shift).abs() < 1e-9);
        }

        #[test]
        fn ks_is_bounded_and_symmetric(
            a in proptest::collection::vec(-50.0..50.0f64, 1..40),
            b in proptest::collection::vec(-50.0..50.0f64, 1..40),
        ) {
            let d = ks_stat(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert!((d - ks_stat(&b, &a).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn ks_is_invariant_under_increasing_affine_maps(
            a in proptest::collection::vec(-50.0..50.0f64, 1..40),
            b in proptest::collection::vec(-50.0..50.0f64, 1..40),
        ) {
            // 2x - 3 is exact in floating point for these inputs.
            let f = |v: f64| 2.0 * v - 3.0;
            let fa: Vec<f64> = a.iter().map(|&v| f(v)).collect();
            let fb: Vec<f64> = b.iter().map(|&v| f(v)).collect();
            let d = ks_stat(&a, &b).unwrap();
            prop_assert!((d - ks_stat(&fa, &fb).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn categorical_emd_is_relabel_invariant(
            masses in proptest::collection::vec(0.01..1.0f64, 2..6),
            other in proptest::collection::vec(0.01..1.0f64, 2..6),
        ) {
            let n = masses.len().min(other.len());
            let norm = |v: &[f64]| {
                let total: f64 = v.iter().sum();
                v.iter().map(|x| x / total).collect::<Vec<_>>()
            };
            let a = norm(&masses[..n]);
            let b = norm(&other[..n]);
            let label = |prefix: &str, i: usize| format!("{prefix}{i}");
            let fa: BTreeMap<String, f64> =
                a.iter().enumerate().map(|(i, &v)| (label("c", i), v)).collect();
            let fb: BTreeMap<String, f64> =
                b.iter().enumerate().map(|(i, &v)| (label("c", i), v)).collect();
            // Reverse the label assignment on both sides.
            let ga: BTreeMap<String, f64> =
                a.iter().enumerate().map(|(i, &v)| (label("c", n - 1 - i), v)).collect();
            let gb: BTreeMap<String, f64> =
                b.iter().enumerate().map(|(i, &v)| (label("c", n - 1 - i), v)).collect();
            let d1 = emd_categorical(&fa, &fb).unwrap();
            let d2 = emd_categorical(&ga, &gb).unwrap();
            prop_assert!((d1 - d2).abs() < 1e-9);
        }
    }

    mod pca {
        use super::*;
        use crate::dataset::{Column, ColumnKind, Schema, Table, Value};

        fn numeric_table(columns: &[(&str, Vec<f64>)]) -> Table {
            let schema = Schema::new(
                columns
                    .iter()
                    .map(|(name, _)| Column {
                        name: name.to_string(),
                        kind: ColumnKind::Continuous,
                        tags: vec![],
                    })
                    .collect(),
            )
            .unwrap();
            let n = columns[0].1.len();
            let rows = (0..n)
                .map(|i| columns.iter().map(|(_, vals)| Value::Number(vals[i])).collect())
                .collect();
            Table::new(schema, rows).unwrap()
        }

        #[test]
        fn first_component_follows_the_correlated_direction() {
            // Columns are standardized before the eigendecomposition, so
            // the dominant direction is the one shared by correlated
            // columns, not the one with the largest raw variance.
            let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
            let y = x.clone();
            let table = numeric_table(&[("x", x), ("y", y)]);
            let basis = PcaBasis::fit(&table).unwrap();
            let projection = basis.project(&table).unwrap();
            let first: Vec<f64> = projection.points.iter().map(|p| p[0]).collect();
            let second: Vec<f64> = projection.points.iter().map(|p| p[1]).collect();
            let var = |v: &[f64]| {
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64
            };
            // Two identical standardized columns: all variance lands on the
            // first component.
            assert!((var(&first) - 2.0).abs() < 1e-9, "var {}", var(&first));
            assert!(var(&second) < 1e-9);
        }

        #[test]
        fn identical_tables_overlay_exactly() {
            let x: Vec<f64> = (0..30).map(|i| (i as f64).sin() * 3.0).collect();
            let y: Vec<f64> = (0..30).map(|i| (i as f64).cos()).collect();
            let table = numeric_table(&[("x", x), ("y", y)]);
            let (real, synth) = pca_overlay(&table, &table).unwrap();
            for (p, q) in real.points.iter().zip(&synth.points) {
                assert!((p[0] - q[0]).abs() < 1e-9);
                assert!((p[1] - q[1]).abs() < 1e-9);
            }
            let c1 = projection_centroid(&real);
            let c2 = projection_centroid(&synth);
            assert!((c1[0] - c2[0]).abs() < 1e-9 && (c1[1] - c2[1]).abs() < 1e-9);
        }

        #[test]
        fn projection_is_deterministic() {
            let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).sin()).collect();
            let y: Vec<f64> = (0..40).map(|i| (i as f64 * 0.3).cos()).collect();
            let table = numeric_table(&[("x", x), ("y", y)]);
            let (a, _) = pca_overlay(&table, &table).unwrap();
            let (b, _) = pca_overlay(&table, &table).unwrap();
            assert_eq!(a.points.len(), b.points.len());
            for (p, q) in a.points.iter().zip(&b.points) {
                assert_eq!(p, q);
            }
        }
    }
}
