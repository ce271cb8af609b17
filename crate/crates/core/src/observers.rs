//! What a measurement actually reveals about a sample. Estimators read only
//! an [`ObservationLog`], never the underlying graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CategoryId, CategoryPartition, Graph, NodeId};
use crate::samplers::{parse_json_line, SampleTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservationMode {
    /// Categories of sampled nodes and the edges among them.
    Induced,
    /// Additionally the category of every neighbor of each sampled node.
    Star,
}

impl ObservationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ObservationMode::Induced => "induced",
            ObservationMode::Star => "star",
        }
    }
}

impl fmt::Display for ObservationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObservationMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "induced" => Ok(ObservationMode::Induced),
            "star" => Ok(ObservationMode::Star),
            other => Err(format!("unknown observation mode `{other}`")),
        }
    }
}

/// One draw as observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    #[serde(rename = "v")]
    pub node: NodeId,
    #[serde(rename = "c")]
    pub category: CategoryId,
    #[serde(rename = "deg")]
    pub degree: usize,
    #[serde(rename = "w")]
    pub weight: f64,
    /// Star mode only: neighbor count per category.
    #[serde(rename = "nbr_cats", default, skip_serializing_if = "Option::is_none")]
    pub neighbor_categories: Option<BTreeMap<CategoryId, usize>>,
}

impl Record {
    /// `|E_{s,B}|`, the number of neighbors of this draw in `b`.
    pub fn neighbors_in(&self, b: CategoryId) -> usize {
        self.neighbor_categories
            .as_ref()
            .and_then(|h| h.get(&b).copied())
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LogMeta {
    mode: ObservationMode,
    #[serde(rename = "N", default)]
    population: Option<usize>,
    categories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EdgeBlock {
    induced_edges: Vec<(NodeId, NodeId)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationLog {
    pub mode: ObservationMode,
    pub population_hint: Option<usize>,
    pub category_names: Vec<String>,
    /// One record per draw, in draw order; repeated draws repeat records.
    pub records: Vec<Record>,
    /// Induced mode only: distinct edges `(u, v)`, `u < v`, among drawn nodes.
    pub induced_edges: Vec<(NodeId, NodeId)>,
}

impl ObservationLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn category_count(&self) -> usize {
        self.category_names.len()
    }

    pub fn categories(&self) -> impl Iterator<Item = CategoryId> {
        (0..self.category_names.len()).map(CategoryId)
    }

    pub fn require_mode(&self, expected: ObservationMode) -> Result<()> {
        if self.mode == expected {
            Ok(())
        } else {
            Err(Error::WrongObservationMode {
                expected,
                found: self.mode,
            })
        }
    }

    /// Log with the same metadata over a different multiset of records;
    /// induced edges are restricted to the nodes still present.
    pub fn with_records(&self, records: Vec<Record>) -> Self {
        let induced_edges = if self.induced_edges.is_empty() {
            Vec::new()
        } else {
            let present: BTreeSet<NodeId> = records.iter().map(|r| r.node).collect();
            self.induced_edges
                .iter()
                .copied()
                .filter(|(u, v)| present.contains(u) && present.contains(v))
                .collect()
        };
        Self {
            mode: self.mode,
            population_hint: self.population_hint,
            category_names: self.category_names.clone(),
            records,
            induced_edges,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.records {
            if r.category.index() >= self.category_count() {
                return Err(Error::UnknownCategory(r.category));
            }
            if !(r.weight > 0.0 && r.weight.is_finite()) {
                return Err(Error::InvalidWeight {
                    node: r.node,
                    weight: r.weight,
                });
            }
            if self.mode == ObservationMode::Star {
                let hist = r.neighbor_categories.as_ref().ok_or_else(|| {
                    Error::InvalidConfig(format!("star record for node {} lacks nbr_cats", r.node))
                })?;
                if hist.values().sum::<usize>() != r.degree {
                    return Err(Error::InvalidConfig(format!(
                        "neighbor categories of node {} do not sum to its degree",
                        r.node
                    )));
                }
            }
        }
        let drawn: BTreeSet<NodeId> = self.records.iter().map(|r| r.node).collect();
        if let Some(&(u, v)) = self
            .induced_edges
            .iter()
            .find(|(u, v)| !drawn.contains(u) || !drawn.contains(v))
        {
            return Err(Error::InvalidConfig(format!(
                "induced edge {u}-{v} has an endpoint that was never drawn"
            )));
        }
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        let meta = LogMeta {
            mode: self.mode,
            population: self.population_hint,
            categories: self.category_names.clone(),
        };
        serde_json::to_writer(&mut out, &meta)?;
        out.write_all(b"\n")?;
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        if self.mode == ObservationMode::Induced {
            let block = EdgeBlock {
                induced_edges: self.induced_edges.clone(),
            };
            serde_json::to_writer(&mut out, &block)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input
            .lines()
            .enumerate()
            .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));
        let (_, first) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing observation meta line".into(),
        })?;
        let meta: LogMeta = parse_json_line(&first?, 1)?;
        let mut records = Vec::new();
        let mut induced_edges = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            if line.trim_start().starts_with("{\"induced_edges\"") {
                let block: EdgeBlock = parse_json_line(&line, idx + 1)?;
                induced_edges.extend(block.induced_edges);
            } else {
                records.push(parse_json_line(&line, idx + 1)?);
            }
        }
        let log = Self {
            mode: meta.mode,
            population_hint: meta.population,
            category_names: meta.categories,
            records,
            induced_edges,
        };
        log.validate()?;
        Ok(log)
    }
}

fn check_trace(g: &Graph, part: &CategoryPartition, trace: &SampleTrace) -> Result<()> {
    part.check_graph(g)?;
    trace.nodes().try_for_each(|v| g.check_node(v))
}

fn base_record(g: &Graph, part: &CategoryPartition, node: NodeId, weight: f64) -> Record {
    Record {
        node,
        category: part.label(node),
        degree: g.degree(node),
        weight,
        neighbor_categories: None,
    }
}

/// Induced subgraph observation: categories of drawn nodes and all graph
/// edges with both endpoints drawn.
pub fn observe_induced(
    g: &Graph,
    part: &CategoryPartition,
    trace: &SampleTrace,
) -> Result<ObservationLog> {
    check_trace(g, part, trace)?;
    let records = trace
        .draws
        .iter()
        .map(|d| base_record(g, part, d.node, d.weight))
        .collect();
    let mut drawn = vec![false; g.node_count()];
    for v in trace.nodes() {
        drawn[v] = true;
    }
    let mut induced_edges = Vec::new();
    for u in (0..g.node_count()).filter(|&u| drawn[u]) {
        let nbrs = g.neighbors(u);
        let start = nbrs.partition_point(|&v| v <= u);
        induced_edges.extend(nbrs[start..].iter().filter(|&&v| drawn[v]).map(|&v| (u, v)));
    }
    Ok(ObservationLog {
        mode: ObservationMode::Induced,
        population_hint: Some(g.node_count()),
        category_names: part.names().to_vec(),
        records,
        induced_edges,
    })
}

/// Labeled star observation: each draw reveals the category histogram of
/// its neighbors. Neighbor identities are not kept.
pub fn observe_star(
    g: &Graph,
    part: &CategoryPartition,
    trace: &SampleTrace,
) -> Result<ObservationLog> {
    check_trace(g, part, trace)?;
    let records = trace
        .draws
        .iter()
        .map(|d| {
            let mut hist = BTreeMap::new();
            for &v in g.neighbors(d.node) {
                *hist.entry(part.label(v)).or_insert(0) += 1;
            }
            Record {
                neighbor_categories: Some(hist),
                ..base_record(g, part, d.node, d.weight)
            }
        })
        .collect();
    Ok(ObservationLog {
        mode: ObservationMode::Star,
        population_hint: Some(g.node_count()),
        category_names: part.names().to_vec(),
        records,
        induced_edges: Vec::new(),
    })
}

pub fn observe(
    g: &Graph,
    part: &CategoryPartition,
    trace: &SampleTrace,
    mode: ObservationMode,
) -> Result<ObservationLog> {
    match mode {
        ObservationMode::Induced => observe_induced(g, part, trace),
        ObservationMode::Star => observe_star(g, part, trace),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::SamplerKind;

    fn fixture() -> (Graph, CategoryPartition) {
        // 0:A 1:A 2:B 3:B 4:A ; node 3 is adjacent to 0, 1 (A) and 2 (B).
        let g = Graph::from_edges(5, [(0, 3), (1, 3), (2, 3), (0, 1)]).unwrap();
        let labels = [0, 0, 1, 1, 0].map(CategoryId).to_vec();
        (g, CategoryPartition::with_generated_names(labels, 2).unwrap())
    }

    fn unit_trace(nodes: &[NodeId]) -> SampleTrace {
        SampleTrace::from_draws(SamplerKind::Uis, nodes.iter().map(|&v| (v, 1.0)))
    }

    #[test]
    fn full_trace_observes_every_edge() {
        let (g, part) = fixture();
        let log = observe_induced(&g, &part, &unit_trace(&[0, 1, 2, 3, 4])).unwrap();
        assert_eq!(log.induced_edges.len(), g.edge_count());
        assert_eq!(log.induced_edges, g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn non_adjacent_pair_observes_nothing() {
        let (g, part) = fixture();
        let log = observe_induced(&g, &part, &unit_trace(&[2, 4])).unwrap();
        assert!(log.induced_edges.is_empty());
        assert_eq!(log.len(), 2);
    }

    #[test]
    fn induced_edges_only_among_drawn() {
        let (g, part) = fixture();
        let log = observe_induced(&g, &part, &unit_trace(&[0, 3, 3, 2])).unwrap();
        assert_eq!(log.induced_edges, vec![(0, 3), (2, 3)]);
        assert_eq!(log.len(), 4);
        log.validate().unwrap();
    }

    #[test]
    fn star_histogram_of_neighbors() {
        let (g, part) = fixture();
        let log = observe_star(&g, &part, &unit_trace(&[3, 4])).unwrap();
        let r = &log.records[0];
        assert_eq!(r.degree, 3);
        assert_eq!(r.neighbors_in(CategoryId(0)), 2);
        assert_eq!(r.neighbors_in(CategoryId(1)), 1);
        let isolated = &log.records[1];
        assert_eq!(isolated.degree, 0);
        assert!(isolated.neighbor_categories.as_ref().unwrap().is_empty());
    }

    #[test]
    fn star_histograms_sum_to_sample_volume() {
        let (g, part) = fixture();
        let nodes = [0, 1, 1, 2, 3, 3, 3];
        let log = observe_star(&g, &part, &unit_trace(&nodes)).unwrap();
        let hist_total: usize = log
            .records
            .iter()
            .map(|r| r.neighbor_categories.as_ref().unwrap().values().sum::<usize>())
            .sum();
        let volume: usize = nodes.iter().map(|&v| g.degree(v)).sum();
        assert_eq!(hist_total, volume);
    }

    #[test]
    fn invalid_node_rejected() {
        let (g, part) = fixture();
        assert!(matches!(
            observe_star(&g, &part, &unit_trace(&[9])),
            Err(Error::InvalidNode(9))
        ));
    }

    #[test]
    fn jsonl_round_trip_both_modes() {
        let (g, part) = fixture();
        let trace = unit_trace(&[0, 3, 3, 2]);
        for mode in [ObservationMode::Induced, ObservationMode::Star] {
            let log = observe(&g, &part, &trace, mode).unwrap();
            let mut buf = Vec::new();
            log.write_jsonl(&mut buf).unwrap();
            let text = String::from_utf8(buf.clone()).unwrap();
            assert!(text.starts_with(&format!("{{\"mode\":\"{mode}\",\"N\":5,")));
            if mode == ObservationMode::Induced {
                assert_eq!(text.lines().last().unwrap(), "{\"induced_edges\":[[0,3],[2,3]]}");
            } else {
                assert!(text.contains("\"nbr_cats\":{\"0\":2,\"1\":1}"));
            }
            assert_eq!(ObservationLog::read_jsonl(&buf[..]).unwrap(), log);
        }
    }
}
