//! Graph and partition data model plus the exact category graph.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Dense category index into a [`CategoryPartition`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryId(pub usize);

impl CategoryId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for CategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Unordered pair of distinct categories, stored with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CategoryPair {
    lo: CategoryId,
    hi: CategoryId,
}

impl CategoryPair {
    pub fn new(a: CategoryId, b: CategoryId) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Self { lo: a, hi: b }),
            std::cmp::Ordering::Greater => Ok(Self { lo: b, hi: a }),
            std::cmp::Ordering::Equal => Err(Error::SelfPairNotSupported),
        }
    }

    pub fn lo(self) -> CategoryId {
        self.lo
    }

    pub fn hi(self) -> CategoryId {
        self.hi
    }

    /// All unordered pairs over `count` categories, in lexicographic order.
    pub fn all(count: usize) -> impl Iterator<Item = CategoryPair> {
        (0..count).flat_map(move |a| {
            (a + 1..count).map(move |b| CategoryPair {
                lo: CategoryId(a),
                hi: CategoryId(b),
            })
        })
    }
}

impl fmt::Display for CategoryPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

/// Immutable simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph on nodes `0..node_count`.
    ///
    /// Self-loops and repeated edges are rejected; the reported `line` is the
    /// 1-based position of the offending edge in `edges`.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut adjacency = vec![Vec::new(); node_count];
        let mut edge_count = 0;
        for (pos, (u, v)) in edges.into_iter().enumerate() {
            for node in [u, v] {
                if node >= node_count {
                    return Err(Error::InvalidNode(node));
                }
            }
            if u == v {
                return Err(Error::SelfLoop {
                    line: pos + 1,
                    node: u as u64,
                });
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
            edge_count += 1;
        }
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateEdge {
                    line: 0,
                    u: u as u64,
                    v: w[0] as u64,
                });
            }
        }
        Ok(Self {
            adjacency,
            edge_count,
        })
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v].len()
    }

    #[inline]
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v]
    }

    /// Edge membership by binary search over the sorted neighbor list.
    #[inline]
    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            let start = list.partition_point(|&v| v <= u);
            list[start..].iter().map(move |&v| (u, v))
        })
    }

    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if v < self.node_count() {
            Ok(())
        } else {
            Err(Error::InvalidNode(v))
        }
    }

    /// Membership mask of the connected component containing `start`.
    pub fn component_of(&self, start: NodeId) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() == 0 || self.component_of(0).iter().all(|&s| s)
    }
}

/// Total assignment of nodes to categories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryPartition {
    labels: Vec<CategoryId>,
    names: Vec<String>,
    sizes: Vec<usize>,
}

impl CategoryPartition {
    pub fn new(labels: Vec<CategoryId>, names: Vec<String>) -> Result<Self> {
        let mut sizes = vec![0; names.len()];
        for &c in &labels {
            *sizes.get_mut(c.index()).ok_or(Error::UnknownCategory(c))? += 1;
        }
        Ok(Self {
            labels,
            names,
            sizes,
        })
    }

    /// Partition with categories named `c0`, `c1`, ... (zero padded so that
    /// lexicographic order matches id order).
    pub fn with_generated_names(labels: Vec<CategoryId>, category_count: usize) -> Result<Self> {
        Self::new(labels, generated_names(category_count))
    }

    #[inline]
    pub fn label(&self, v: NodeId) -> CategoryId {
        self.labels[v]
    }

    pub fn labels(&self) -> &[CategoryId] {
        &self.labels
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn category_count(&self) -> usize {
        self.names.len()
    }

    pub fn categories(&self) -> impl Iterator<Item = CategoryId> {
        (0..self.names.len()).map(CategoryId)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, c: CategoryId) -> Result<&str> {
        self.names
            .get(c.index())
            .map(String::as_str)
            .ok_or(Error::UnknownCategory(c))
    }

    pub fn size(&self, c: CategoryId) -> Result<usize> {
        self.sizes
            .get(c.index())
            .copied()
            .ok_or(Error::UnknownCategory(c))
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn members(&self, c: CategoryId) -> impl Iterator<Item = NodeId> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, &l)| l == c)
            .map(|(v, _)| v)
    }

    pub fn check_graph(&self, g: &Graph) -> Result<()> {
        if self.labels.len() == g.node_count() {
            Ok(())
        } else {
            Err(Error::PartitionMismatch {
                labels: self.labels.len(),
                nodes: g.node_count(),
            })
        }
    }

    fn check_category(&self, c: CategoryId) -> Result<()> {
        if c.index() < self.names.len() {
            Ok(())
        } else {
            Err(Error::UnknownCategory(c))
        }
    }
}

pub(crate) fn generated_names(count: usize) -> Vec<String> {
    let width = count.saturating_sub(1).to_string().len();
    (0..count).map(|i| format!("c{i:0width$}")).collect()
}

/// Ground-truth category graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryGraph {
    pub names: Vec<String>,
    pub sizes: Vec<usize>,
    pub cut_counts: BTreeMap<CategoryPair, usize>,
    pub weights: BTreeMap<CategoryPair, f64>,
}

impl CategoryGraph {
    pub fn category_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn node_count(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// `w(A,B)`; zero for pairs without an edge.
    pub fn weight(&self, a: CategoryId, b: CategoryId) -> Result<f64> {
        let pair = CategoryPair::new(a, b)?;
        Ok(self.weights.get(&pair).copied().unwrap_or(0.0))
    }
}

/// Sum of degrees over `nodes`.
pub fn volume(g: &Graph, nodes: &[NodeId]) -> Result<usize> {
    nodes.iter().try_fold(0, |acc, &v| {
        g.check_node(v)?;
        Ok(acc + g.degree(v))
    })
}

fn category_volume(g: &Graph, part: &CategoryPartition, a: CategoryId) -> usize {
    part.members(a).map(|v| g.degree(v)).sum()
}

/// Relative size of `a` by node count and by volume: `(f_A, f_vol_A)`.
pub fn relative_fractions(g: &Graph, part: &CategoryPartition, a: CategoryId) -> Result<(f64, f64)> {
    part.check_graph(g)?;
    let size = part.size(a)?;
    let n = g.node_count();
    let total_volume = 2 * g.edge_count();
    let f = if n == 0 { 0.0 } else { size as f64 / n as f64 };
    let f_vol = if total_volume == 0 {
        0.0
    } else {
        category_volume(g, part, a) as f64 / total_volume as f64
    };
    Ok((f, f_vol))
}

/// Number of edges with one endpoint in `a` and the other in `b`.
pub fn edge_cut(g: &Graph, part: &CategoryPartition, a: CategoryId, b: CategoryId) -> Result<usize> {
    part.check_graph(g)?;
    part.check_category(a)?;
    part.check_category(b)?;
    if a == b {
        return Err(Error::SelfPairNotSupported);
    }
    Ok(part
        .members(a)
        .map(|u| {
            g.neighbors(u)
                .iter()
                .filter(|&&v| part.label(v) == b)
                .count()
        })
        .sum())
}

pub fn exact_category_graph(g: &Graph, part: &CategoryPartition) -> Result<CategoryGraph> {
    part.check_graph(g)?;
    let mut cut_counts = BTreeMap::new();
    for (u, v) in g.edges() {
        let (a, b) = (part.label(u), part.label(v));
        if a != b {
            *cut_counts.entry(CategoryPair::new(a, b)?).or_insert(0) += 1;
        }
    }
    let sizes = part.sizes().to_vec();
    let weights = cut_counts
        .iter()
        .map(|(&pair, &cut)| {
            let max_cut = sizes[pair.lo().index()] as f64 * sizes[pair.hi().index()] as f64;
            (pair, cut as f64 / max_cut)
        })
        .collect();
    Ok(CategoryGraph {
        names: part.names().to_vec(),
        sizes,
        cut_counts,
        weights,
    })
}

/// Which node set a mean degree is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Category(CategoryId),
    Whole,
}

/// `k_A = vol(A)/|A|` or `k_V = vol(V)/N`.
pub fn mean_degree(g: &Graph, part: &CategoryPartition, scope: Scope) -> Result<f64> {
    part.check_graph(g)?;
    match scope {
        Scope::Whole => {
            if g.node_count() == 0 {
                return Err(Error::EmptyGraph);
            }
            Ok(2.0 * g.edge_count() as f64 / g.node_count() as f64)
        }
        Scope::Category(a) => {
            let size = part.size(a)?;
            if size == 0 {
                return Err(Error::EmptyCategory(a));
            }
            Ok(category_volume(g, part, a) as f64 / size as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn labels(ids: &[usize]) -> Vec<CategoryId> {
        ids.iter().copied().map(CategoryId).collect()
    }

    #[test]
    fn volume_examples() {
        assert_eq!(volume(&triangle(), &[0, 1, 2]).unwrap(), 6);
        assert_eq!(volume(&triangle(), &[]).unwrap(), 0);
        assert_eq!(volume(&path3(), &[0, 2]).unwrap(), 2);
        assert!(matches!(volume(&path3(), &[7]), Err(Error::InvalidNode(7))));
    }

    #[test]
    fn relative_fractions_examples() {
        let g = path3();
        let part = CategoryPartition::with_generated_names(labels(&[0, 1, 0]), 2).unwrap();
        let (f, f_vol) = relative_fractions(&g, &part, CategoryId(1)).unwrap();
        assert_eq!(f, 1.0 / 3.0);
        assert_eq!(f_vol, 0.5);

        let whole = CategoryPartition::with_generated_names(labels(&[0, 0, 0]), 1).unwrap();
        assert_eq!(relative_fractions(&g, &whole, CategoryId(0)).unwrap(), (1.0, 1.0));
        assert!(matches!(
            relative_fractions(&g, &whole, CategoryId(3)),
            Err(Error::UnknownCategory(_))
        ));
    }

    #[test]
    fn edge_cut_examples() {
        let g = Graph::from_edges(4, [(0, 2)]).unwrap();
        let part = CategoryPartition::with_generated_names(labels(&[0, 0, 1, 1]), 2).unwrap();
        assert_eq!(edge_cut(&g, &part, CategoryId(0), CategoryId(1)).unwrap(), 1);
        assert_eq!(edge_cut(&g, &part, CategoryId(1), CategoryId(0)).unwrap(), 1);
        assert!(matches!(
            edge_cut(&g, &part, CategoryId(0), CategoryId(0)),
            Err(Error::SelfPairNotSupported)
        ));

        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(edge_cut(&g, &part, CategoryId(0), CategoryId(1)).unwrap(), 0);
    }

    #[test]
    fn mean_degree_examples() {
        let g = path3();
        let part = CategoryPartition::with_generated_names(labels(&[0, 1, 0]), 3).unwrap();
        assert_eq!(mean_degree(&g, &part, Scope::Whole).unwrap(), 4.0 / 3.0);
        assert_eq!(mean_degree(&g, &part, Scope::Category(CategoryId(1))).unwrap(), 2.0);
        assert!(matches!(
            mean_degree(&g, &part, Scope::Category(CategoryId(2))),
            Err(Error::EmptyCategory(_))
        ));

        let k4 = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let part = CategoryPartition::with_generated_names(labels(&[0, 0, 1, 1]), 2).unwrap();
        assert_eq!(mean_degree(&k4, &part, Scope::Category(CategoryId(0))).unwrap(), 3.0);
    }

    #[test]
    fn single_category_has_no_edges() {
        let part = CategoryPartition::with_generated_names(labels(&[0, 0, 0]), 1).unwrap();
        let cg = exact_category_graph(&triangle(), &part).unwrap();
        assert!(cg.weights.is_empty());
        assert_eq!(cg.sizes, vec![3]);
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(matches!(
            Graph::from_edges(2, [(1, 1)]),
            Err(Error::SelfLoop { node: 1, .. })
        ));
        assert!(matches!(
            Graph::from_edges(2, [(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge { .. })
        ));
    }

    #[test]
    fn generated_names_sort_in_id_order() {
        let names = generated_names(12);
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        assert_eq!(names[3], "c03");
    }

    #[test]
    fn edges_iterates_each_once() {
        let g = triangle();
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(0, 1), (0, 2), (1, 2)]);
        assert!(g.has_edge(2, 0));
        assert!(!path3().has_edge(0, 2));
    }
}
