//! Shared helpers for the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use polisynth_core::dataset::Schema;
use polisynth_core::policy::{extract_rules, DeonticRule, TriggerLexicon};
use polisynth_core::sensitivity::{
    classify_attributes, default_tag_keywords, MapEntry, Provenance, SensitivityLevel,
    SensitivityMap,
};

pub fn workspace_file(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

pub fn bundled_policy_text() -> String {
    std::fs::read_to_string(workspace_file("data/eu_code_excerpt.txt"))
        .expect("bundled policy excerpt exists")
}

pub fn bundled_rules() -> Vec<DeonticRule> {
    extract_rules(
        &bundled_policy_text(),
        &TriggerLexicon::builtin(),
        "eu_code_excerpt",
    )
}

/// The sensitivity map the default pipeline derives for the benchmark
/// schema: tagged columns resolved through the bundled rules, untagged
/// columns left at the High default.
pub fn benchmark_map(schema: &Schema) -> SensitivityMap {
    classify_attributes(
        schema,
        &bundled_rules(),
        &default_tag_keywords(),
        &BTreeMap::new(),
    )
}

/// Every attribute pinned to Low, as an explicit override set.
pub fn all_low_map(schema: &Schema) -> SensitivityMap {
    let mut map = SensitivityMap::default();
    for column in &schema.columns {
        map.insert(
            column.name.clone(),
            MapEntry {
                level: SensitivityLevel::Low,
                provenance: Provenance::ExplicitConfig,
            },
        );
    }
    map
}

const EPS: f64 = 1e-12;

struct Arc {
    to: usize,
    cap: f64,
    cost: f64,
    rev: usize,
}

fn add_arc(graph: &mut [Vec<Arc>], from: usize, to: usize, cap: f64, cost: f64) {
    let rev_from = graph[to].len();
    let rev_to = graph[from].len();
    graph[from].push(Arc {
        to,
        cap,
        cost,
        rev: rev_from,
    });
    graph[to].push(Arc {
        to: from,
        cap: 0.0,
        cost: -cost,
        rev: rev_to,
    });
}

/// Exact minimum-cost transport between two unit-mass distributions,
/// solved over the full bipartite graph with successive shortest-path
/// augmentation. The cost structure is entirely in `cost`, so the solver
/// cross-checks both the line sweep and the categorical distance without
/// sharing any of their shortcuts.
fn min_cost_transport(supplies: &[f64], demands: &[f64], cost: impl Fn(usize, usize) -> f64) -> f64 {
    assert!(!supplies.is_empty() && !demands.is_empty());
    let (na, nb) = (supplies.len(), demands.len());
    let n_nodes = na + nb + 2;
    let source = 0;
    let sink = n_nodes - 1;
    let mut graph: Vec<Vec<Arc>> = (0..n_nodes).map(|_| Vec::new()).collect();
    for (i, &mass) in supplies.iter().enumerate() {
        add_arc(&mut graph, source, 1 + i, mass, 0.0);
        for j in 0..nb {
            add_arc(&mut graph, 1 + i, 1 + na + j, f64::INFINITY, cost(i, j));
        }
    }
    for (j, &mass) in demands.iter().enumerate() {
        add_arc(&mut graph, 1 + na + j, sink, mass, 0.0);
    }

    let mut total_cost = 0.0;
    let mut shipped = 0.0;
    while shipped < 1.0 - EPS {
        // Bellman-Ford shortest path by cost over positive residual arcs.
        let mut dist = vec![f64::INFINITY; n_nodes];
        let mut pred: Vec<Option<(usize, usize)>> = vec![None; n_nodes];
        dist[source] = 0.0;
        for _ in 0..n_nodes {
            let mut improved = false;
            for u in 0..n_nodes {
                if dist[u].is_infinite() {
                    continue;
                }
                for (k, arc) in graph[u].iter().enumerate() {
                    if arc.cap > EPS && dist[u] + arc.cost < dist[arc.to] - EPS {
                        dist[arc.to] = dist[u] + arc.cost;
                        pred[arc.to] = Some((u, k));
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        if dist[sink].is_infinite() {
            break;
        }
        let mut push = 1.0 - shipped;
        let mut v = sink;
        while let Some((u, k)) = pred[v] {
            push = push.min(graph[u][k].cap);
            v = u;
        }
        let mut v = sink;
        while let Some((u, k)) = pred[v] {
            let rev = graph[u][k].rev;
            graph[u][k].cap -= push;
            graph[v][rev].cap += push;
            v = u;
        }
        total_cost += push * dist[sink];
        shipped += push;
    }
    total_cost
}

/// Earth mover's distance between two equally weighted point sets on the
/// line, via the exact transport solver.
pub fn transport_distance(a: &[f64], b: &[f64]) -> f64 {
    let supplies = vec![1.0 / a.len() as f64; a.len()];
    let demands = vec![1.0 / b.len() as f64; b.len()];
    min_cost_transport(&supplies, &demands, |i, j| (a[i] - b[j]).abs())
}

/// Transport distance between two categorical frequency maps where moving
/// mass between distinct categories costs one, via the exact solver.
pub fn unit_cost_transport(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let supplies: Vec<f64> = keys.iter().map(|k| a.get(*k).copied().unwrap_or(0.0)).collect();
    let demands: Vec<f64> = keys.iter().map(|k| b.get(*k).copied().unwrap_or(0.0)).collect();
    min_cost_transport(&supplies, &demands, |i, j| if i == j { 0.0 } else { 1.0 })
}

#[cfg(test)]
mod oracle_tests {
    use super::{transport_distance, unit_cost_transport};
    use std::collections::BTreeMap;

    #[test]
    fn point_masses() {
        assert!((transport_distance(&[0.0], &[3.0]) - 3.0).abs() < 1e-12);
        assert!(transport_distance(&[1.5], &[1.5]).abs() < 1e-12);
    }

    #[test]
    fn unit_costs_move_the_excess_mass() {
        let freqs = |pairs: &[(&str, f64)]| -> BTreeMap<String, f64> {
            pairs.iter().map(|&(k, f)| (k.to_string(), f)).collect()
        };
        let a = freqs(&[("a", 0.5), ("b", 0.5)]);
        let b = freqs(&[("a", 0.75), ("b", 0.25)]);
        assert!((unit_cost_transport(&a, &b) - 0.25).abs() < 1e-12);
        assert!(unit_cost_transport(&a, &a).abs() < 1e-12);
        // Disjoint supports force every unit of mass to move.
        let c = freqs(&[("c", 1.0)]);
        assert!((unit_cost_transport(&a, &c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn splits_mass_across_targets() {
        // Half the unit mass travels 1.0, the other half stays.
        let d = transport_distance(&[0.0, 1.0], &[1.0]);
        assert!((d - 0.5).abs() < 1e-12, "{d}");
    }

    #[test]
    fn is_symmetric() {
        let a = [0.0, 0.25, 4.0];
        let b = [1.0, 1.0, 2.5, 3.0];
        let fwd = transport_distance(&a, &b);
        let back = transport_distance(&b, &a);
        assert!((fwd - back).abs() < 1e-12);
    }
}
