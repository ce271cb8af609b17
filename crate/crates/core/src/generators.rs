//! Synthetic benchmark graphs: a k-regular random graph inside each category,
//! random inter-category edges on top, and a fraction `alpha` of labels shuffled.

use std::collections::HashSet;

use log::warn;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CategoryId, CategoryPartition, Graph, NodeId};

/// Whole-configuration restarts allowed per category before giving up.
pub const DEFAULT_MAX_ATTEMPTS: usize = 100;

/// Category sizes of the large benchmark graph (N = 88,850).
pub const BENCHMARK_SIZES: [usize; 10] = [50, 100, 200, 500, 1000, 2000, 5000, 10000, 20000, 50000];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticParams {
    pub category_sizes: Vec<usize>,
    pub k: usize,
    /// Defaults to `N * k / 10`.
    #[serde(default)]
    pub inter_edge_count: Option<usize>,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticParams {
    pub fn node_count(&self) -> usize {
        self.category_sizes.iter().sum()
    }

    pub fn inter_edges(&self) -> usize {
        self.inter_edge_count
            .unwrap_or(self.node_count() * self.k / 10)
    }

    pub fn validate(&self) -> Result<()> {
        for &size in &self.category_sizes {
            check_regular_feasible(size, self.k)?;
        }
        check_alpha(self.alpha)
    }
}

fn check_regular_feasible(size: usize, k: usize) -> Result<()> {
    if size <= k || (size * k) % 2 == 1 {
        return Err(Error::InfeasibleRegularGraph { size, k });
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// Disjoint k-regular random graphs, one per category; category `i` owns a
/// contiguous block of node ids.
pub fn gen_intra_regular<R: Rng + ?Sized>(
    sizes: &[usize],
    k: usize,
    rng: &mut R,
) -> Result<(Graph, CategoryPartition)> {
    gen_intra_regular_with_attempts(sizes, k, DEFAULT_MAX_ATTEMPTS, rng)
}

pub fn gen_intra_regular_with_attempts<R: Rng + ?Sized>(
    sizes: &[usize],
    k: usize,
    max_attempts: usize,
    rng: &mut R,
) -> Result<(Graph, CategoryPartition)> {
    for &size in sizes {
        check_regular_feasible(size, k)?;
    }
    let node_count = sizes.iter().sum();
    let mut edges = Vec::with_capacity(node_count * k / 2);
    let mut labels = Vec::with_capacity(node_count);
    let mut offset = 0;
    for (c, &size) in sizes.iter().enumerate() {
        let block = random_regular(size, k, max_attempts, rng)?;
        edges.extend(block.into_iter().map(|(u, v)| (u + offset, v + offset)));
        labels.extend(std::iter::repeat_n(CategoryId(c), size));
        offset += size;
    }
    let graph = Graph::from_edges(node_count, edges)?;
    let part = CategoryPartition::with_generated_names(labels, sizes.len())?;
    Ok((graph, part))
}

/// Pairing model on `size * k` stubs. Pairs that would form a self-loop or a
/// repeated edge are re-drawn; a configuration that gets stuck is discarded
/// and restarted.
fn random_regular<R: Rng + ?Sized>(
    size: usize,
    k: usize,
    max_attempts: usize,
    rng: &mut R,
) -> Result<Vec<(NodeId, NodeId)>> {
    'attempt: for _ in 0..max_attempts {
        let mut stubs: Vec<NodeId> = (0..size).flat_map(|v| std::iter::repeat_n(v, k)).collect();
        let mut adjacent: Vec<Vec<NodeId>> = vec![Vec::with_capacity(k); size];
        let mut edges = Vec::with_capacity(size * k / 2);
        let mut failures = 0usize;
        while !stubs.is_empty() {
            let i = rng.gen_range(0..stubs.len());
            let j = rng.gen_range(0..stubs.len());
            let (u, v) = (stubs[i], stubs[j]);
            if i != j && u != v && !adjacent[u].contains(&v) {
                adjacent[u].push(v);
                adjacent[v].push(u);
                edges.push((u.min(v), u.max(v)));
                let (hi, lo) = (i.max(j), i.min(j));
                stubs.swap_remove(hi);
                stubs.swap_remove(lo);
                failures = 0;
                continue;
            }
            failures += 1;
            if failures > 64 && !has_suitable_pair(&stubs, &adjacent) {
                continue 'attempt;
            }
            if failures > 64 {
                failures = 0;
            }
        }
        return Ok(edges);
    }
    Err(Error::GenerationFailed {
        attempts: max_attempts,
    })
}

fn has_suitable_pair(stubs: &[NodeId], adjacent: &[Vec<NodeId>]) -> bool {
    stubs.iter().enumerate().any(|(i, &u)| {
        stubs[i + 1..]
            .iter()
            .any(|&v| u != v && !adjacent[u].contains(&v))
    })
}

/// Adds exactly `m` new edges, each joining two different categories.
pub fn add_inter_edges<R: Rng + ?Sized>(
    g: &Graph,
    part: &CategoryPartition,
    m: usize,
    rng: &mut R,
) -> Result<Graph> {
    part.check_graph(g)?;
    let n = g.node_count();
    let same_pairs: usize = part.sizes().iter().map(|&s| s * s.saturating_sub(1) / 2).sum();
    let cross_pairs = n * n.saturating_sub(1) / 2 - same_pairs;
    let existing_cross = g
        .edges()
        .filter(|&(u, v)| part.label(u) != part.label(v))
        .count();
    let available = cross_pairs - existing_cross;
    if m > available {
        return Err(Error::TooManyEdgesRequested {
            requested: m,
            available,
        });
    }

    let new_edges: Vec<(NodeId, NodeId)> = if m * 2 > available {
        // Dense request: enumerate the free cross pairs and pick m of them.
        let free: Vec<(NodeId, NodeId)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| part.label(u) != part.label(v) && !g.has_edge(u, v))
            .collect();
        index::sample(rng, free.len(), m)
            .into_iter()
            .map(|i| free[i])
            .collect()
    } else {
        let mut chosen = HashSet::with_capacity(m);
        let mut ordered = Vec::with_capacity(m);
        while ordered.len() < m {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if part.label(u) == part.label(v) || g.has_edge(u, v) {
                continue;
            }
            let key = (u.min(v), u.max(v));
            if chosen.insert(key) {
                ordered.push(key);
            }
        }
        ordered
    };

    Graph::from_edges(n, g.edges().chain(new_edges))
}

/// Shuffles the labels of `floor(alpha * N)` uniformly chosen nodes among
/// themselves. Category sizes are unchanged.
pub fn permute_labels<R: Rng + ?Sized>(
    part: &CategoryPartition,
    alpha: f64,
    rng: &mut R,
) -> Result<CategoryPartition> {
    check_alpha(alpha)?;
    let n = part.node_count();
    let count = ((alpha * n as f64).floor() as usize).min(n);
    let selected = index::sample(rng, n, count).into_vec();
    let mut moved: Vec<CategoryId> = selected.iter().map(|&v| part.label(v)).collect();
    moved.shuffle(rng);
    let mut labels = part.labels().to_vec();
    for (&v, c) in selected.iter().zip(moved) {
        labels[v] = c;
    }
    CategoryPartition::new(labels, part.names().to_vec())
}

pub fn synthetic_graph(params: &SyntheticParams) -> Result<(Graph, CategoryPartition)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (g, part) = gen_intra_regular(&params.category_sizes, params.k, &mut rng)?;
    let g = add_inter_edges(&g, &part, params.inter_edges(), &mut rng)?;
    let part = permute_labels(&part, params.alpha, &mut rng)?;
    if !g.is_connected() {
        warn!(
            "synthetic graph with {} nodes is disconnected; walks stay in the start component",
            g.node_count()
        );
    }
    Ok((g, part))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::edge_cut;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn two_regular_on_six() {
        let (g, _) = gen_intra_regular(&[6], 2, &mut rng(1)).unwrap();
        assert!((0..6).all(|v| g.degree(v) == 2));
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn blocks_have_no_cross_edges() {
        let (g, part) = gen_intra_regular(&[50, 100], 5, &mut rng(2)).unwrap();
        assert!((0..150).all(|v| g.degree(v) == 5));
        assert_eq!(edge_cut(&g, &part, CategoryId(0), CategoryId(1)).unwrap(), 0);
    }

    #[test]
    fn three_regular_on_four_is_complete() {
        for seed in 0..20 {
            let (g, _) = gen_intra_regular(&[4], 3, &mut rng(seed)).unwrap();
            assert_eq!(g.edge_count(), 6);
            assert!(g.edges().all(|(u, v)| u != v));
        }
    }

    #[test]
    fn infeasible_sizes_rejected() {
        assert!(matches!(
            gen_intra_regular(&[5], 5, &mut rng(0)),
            Err(Error::InfeasibleRegularGraph { size: 5, k: 5 })
        ));
        assert!(matches!(
            gen_intra_regular(&[7], 3, &mut rng(0)),
            Err(Error::InfeasibleRegularGraph { .. })
        ));
    }

    #[test]
    fn inter_edges_zero_is_identity() {
        let (g, part) = gen_intra_regular(&[10, 10], 4, &mut rng(3)).unwrap();
        let h = add_inter_edges(&g, &part, 0, &mut rng(4)).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn inter_edges_fill_complete_bipartite_cut() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let part = CategoryPartition::with_generated_names(
            vec![CategoryId(0), CategoryId(0), CategoryId(1), CategoryId(1)],
            2,
        )
        .unwrap();
        let h = add_inter_edges(&g, &part, 4, &mut rng(5)).unwrap();
        assert_eq!(edge_cut(&h, &part, CategoryId(0), CategoryId(1)).unwrap(), 4);
        assert!(matches!(
            add_inter_edges(&g, &part, 5, &mut rng(5)),
            Err(Error::TooManyEdgesRequested { requested: 5, available: 4 })
        ));
    }

    #[test]
    fn permute_alpha_zero_is_identity() {
        let (_, part) = gen_intra_regular(&[20, 30], 4, &mut rng(6)).unwrap();
        assert_eq!(permute_labels(&part, 0.0, &mut rng(7)).unwrap(), part);
        assert!(matches!(
            permute_labels(&part, 1.5, &mut rng(7)),
            Err(Error::InvalidAlpha(_))
        ));
    }

    #[test]
    fn permute_alpha_one_preserves_sizes() {
        let (_, part) = gen_intra_regular(&[20, 30, 50], 4, &mut rng(8)).unwrap();
        let permuted = permute_labels(&part, 1.0, &mut rng(9)).unwrap();
        assert_eq!(permuted.sizes(), part.sizes());
        assert_ne!(permuted.labels(), part.labels());
    }

    #[test]
    fn permute_selects_floor_alpha_n() {
        let n = 88_850;
        assert_eq!((0.5 * n as f64).floor() as usize, 44_425);
        // Selection count bounds the number of labels that can change.
        let labels: Vec<_> = (0..1000).map(|v| CategoryId(v % 2)).collect();
        let part = CategoryPartition::with_generated_names(labels, 2).unwrap();
        let permuted = permute_labels(&part, 0.1, &mut rng(10)).unwrap();
        let changed = part
            .labels()
            .iter()
            .zip(permuted.labels())
            .filter(|(a, b)| a != b)
            .count();
        assert!(changed <= 100);
        assert!(changed > 0);
    }

    #[test]
    fn desk_scale_edge_count() {
        let params = SyntheticParams {
            category_sizes: vec![20, 30, 40, 50, 60, 80, 100, 140, 200, 280],
            k: 10,
            inter_edge_count: None,
            alpha: 0.5,
            seed: 11,
        };
        let (g, part) = synthetic_graph(&params).unwrap();
        assert_eq!(g.node_count(), 1000);
        assert_eq!(g.edge_count(), 6000);
        assert_eq!(part.sizes(), params.category_sizes.as_slice());
    }

    #[test]
    fn deterministic_under_seed() {
        let params = SyntheticParams {
            category_sizes: vec![30, 40],
            k: 4,
            inter_edge_count: Some(25),
            alpha: 0.3,
            seed: 99,
        };
        assert_eq!(synthetic_graph(&params).unwrap(), synthetic_graph(&params).unwrap());
    }
}
