use catgraph::{CategoryId, CategoryPartition, Graph};

/// Connected irregular 8-node graph in three categories.
pub fn eight_node_graph() -> (Graph, CategoryPartition) {
    let g = Graph::from_edges(
        8,
        [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (3, 4), (4, 5), (4, 6), (5, 6), (6, 7), (2, 6)],
    )
    .unwrap();
    let labels = [0, 0, 0, 1, 1, 2, 2, 2].map(CategoryId).to_vec();
    (g, CategoryPartition::with_generated_names(labels, 3).unwrap())
}

/// Per-node visit frequencies of a trace.
pub fn frequencies(nodes: impl Iterator<Item = usize>, n: usize) -> Vec<f64> {
    let mut counts = vec![0usize; n];
    let mut total = 0usize;
    for v in nodes {
        counts[v] += 1;
        total += 1;
    }
    counts.into_iter().map(|c| c as f64 / total as f64).collect()
}

pub fn max_relative_gap(observed: &[f64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(o, e)| ((o - e) / e).abs())
        .fold(0.0, f64::max)
}
