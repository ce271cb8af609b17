//! Shared fixtures and independent reference implementations for the
//! integration tests. The oracles work from the graph and the list of drawn
//! nodes directly, without going through the observers or estimators.
#![allow(dead_code)]

use std::collections::BTreeMap;

use catgraph::{CategoryId, CategoryPair, CategoryPartition, Graph, NodeId};
use rand::Rng;

mod fixtures;
#[allow(unused_imports)]
pub use fixtures::*;

/// Erdős–Rényi graph with random labels; every category is non-empty.
pub fn random_graph<R: Rng>(n: usize, p: f64, cats: usize, rng: &mut R) -> (Graph, CategoryPartition) {
    assert!(n >= cats);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let g = Graph::from_edges(n, edges).unwrap();
    let labels = (0..n)
        .map(|v| CategoryId(if v < cats { v } else { rng.gen_range(0..cats) }))
        .collect();
    (g, CategoryPartition::with_generated_names(labels, cats).unwrap())
}

fn adjacency_matrix(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut m = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        m[u][v] = true;
        m[v][u] = true;
    }
    m
}

/// Category sizes and weights by enumerating every node pair.
pub fn brute_category_graph(g: &Graph, part: &CategoryPartition) -> (Vec<usize>, BTreeMap<CategoryPair, f64>) {
    let n = g.node_count();
    let c = part.category_count();
    let adj = adjacency_matrix(g);
    let mut sizes = vec![0usize; c];
    for v in 0..n {
        sizes[part.label(v).index()] += 1;
    }
    let mut weights = BTreeMap::new();
    for a in 0..c {
        for b in a + 1..c {
            let mut cut = 0usize;
            for (u, row) in adj.iter().enumerate() {
                for (v, &edge) in row.iter().enumerate() {
                    if edge && part.label(u).index() == a && part.label(v).index() == b {
                        cut += 1;
                    }
                }
            }
            if cut > 0 {
                let pair = CategoryPair::new(CategoryId(a), CategoryId(b)).unwrap();
                weights.insert(pair, cut as f64 / (sizes[a] * sizes[b]) as f64);
            }
        }
    }
    (sizes, weights)
}

fn draws_in(part: &CategoryPartition, nodes: &[NodeId], a: usize) -> Vec<NodeId> {
    nodes.iter().copied().filter(|&v| part.label(v).index() == a).collect()
}

fn neighbors_in(g: &Graph, part: &CategoryPartition, v: NodeId, a: usize) -> usize {
    g.neighbors(v).iter().filter(|&&u| part.label(u).index() == a).count()
}

/// Uniform induced size: `N * n_A / n`.
pub fn size_induced(part: &CategoryPartition, nodes: &[NodeId], population: f64) -> Vec<f64> {
    (0..part.category_count())
        .map(|a| population * (draws_in(part, nodes, a).len() as f64 / nodes.len() as f64))
        .collect()
}

/// Uniform star size: `N * f̂vol_A * (k̂_V / k̂_A)`.
pub fn size_star(g: &Graph, part: &CategoryPartition, nodes: &[NodeId], population: f64) -> Vec<Option<f64>> {
    let total_deg: usize = nodes.iter().map(|&v| g.degree(v)).sum();
    let k_v = total_deg as f64 / nodes.len() as f64;
    (0..part.category_count())
        .map(|a| {
            let s_a = draws_in(part, nodes, a);
            let deg_a: usize = s_a.iter().map(|&v| g.degree(v)).sum();
            if s_a.is_empty() || deg_a == 0 {
                return None;
            }
            let k_a = deg_a as f64 / s_a.len() as f64;
            let into_a: usize = nodes.iter().map(|&v| neighbors_in(g, part, v, a)).sum();
            let fvol = into_a as f64 / total_deg as f64;
            Some(population * fvol * (k_v / k_a))
        })
        .collect()
}

/// Uniform induced weight: adjacency count over all draw pairs, `/ (n_A n_B)`.
pub fn weight_induced(g: &Graph, part: &CategoryPartition, nodes: &[NodeId]) -> BTreeMap<CategoryPair, Option<f64>> {
    let adj = adjacency_matrix(g);
    let c = part.category_count();
    let mut out = BTreeMap::new();
    for a in 0..c {
        for b in a + 1..c {
            let (s_a, s_b) = (draws_in(part, nodes, a), draws_in(part, nodes, b));
            let pair = CategoryPair::new(CategoryId(a), CategoryId(b)).unwrap();
            if s_a.is_empty() || s_b.is_empty() {
                out.insert(pair, None);
                continue;
            }
            let mut hits = 0usize;
            for &u in &s_a {
                for &v in &s_b {
                    hits += adj[u][v] as usize;
                }
            }
            out.insert(pair, Some(hits as f64 / (s_a.len() * s_b.len()) as f64));
        }
    }
    out
}

/// Uniform star weight: `(Σ_{S_A} |E_{a,B}| + Σ_{S_B} |E_{b,A}|) / (n_A |B̂| + n_B |Â|)`.
pub fn weight_star(
    g: &Graph,
    part: &CategoryPartition,
    nodes: &[NodeId],
    sizes: &[Option<f64>],
) -> BTreeMap<CategoryPair, Option<f64>> {
    let c = part.category_count();
    let mut out = BTreeMap::new();
    for a in 0..c {
        for b in a + 1..c {
            let (s_a, s_b) = (draws_in(part, nodes, a), draws_in(part, nodes, b));
            let pair = CategoryPair::new(CategoryId(a), CategoryId(b)).unwrap();
            let (n_a, n_b) = (s_a.len() as f64, s_b.len() as f64);
            let size_b = if s_a.is_empty() { Some(0.0) } else { sizes[b] };
            let size_a = if s_b.is_empty() { Some(0.0) } else { sizes[a] };
            let value = match (size_a, size_b) {
                (Some(sa), Some(sb)) => {
                    let num: usize = s_a.iter().map(|&v| neighbors_in(g, part, v, b)).sum::<usize>()
                        + s_b.iter().map(|&v| neighbors_in(g, part, v, a)).sum::<usize>();
                    let den = n_a * sb + n_b * sa;
                    (den > 0.0).then(|| num as f64 / den)
                }
                _ => None,
            };
            out.insert(pair, value);
        }
    }
    out
}

pub fn relative_error(x: f64, truth: f64) -> f64 {
    if truth == 0.0 {
        x.abs()
    } else {
        ((x - truth) / truth).abs()
    }
}
