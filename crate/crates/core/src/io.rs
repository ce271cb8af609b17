//! Edge-list and category file loading, and category graph export.
//!
//! Edge files hold one `u<TAB>v` pair per line, category files one
//! `node<TAB>category` pair per line. Blank lines and lines starting with `#`
//! are ignored. External node ids are mapped to dense ids in increasing
//! order; category names are interned in lexicographic order.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{CategoryGraphEstimate, EstimatorKind, Population};
use crate::graph::{CategoryId, CategoryPair, CategoryPartition, Graph, NodeId};

fn data_lines<R: BufRead>(input: R) -> impl Iterator<Item = Result<(usize, String)>> {
    input.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(e.into())),
        Ok(l) => {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, t.to_string())))
            }
        }
    })
}

fn two_fields(line: usize, text: &str) -> Result<(String, String)> {
    let mut parts = text.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), None) => Ok((a.to_string(), b.to_string())),
        _ => Err(Error::Parse {
            line,
            message: format!("expected two fields, got `{text}`"),
        }),
    }
}

fn parse_node(line: usize, s: &str) -> Result<u64> {
    s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid node id `{s}`"),
    })
}

/// Parses an edge list into external-id pairs.
pub fn read_edges<R: BufRead>(input: R) -> Result<Vec<(u64, u64)>> {
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for item in data_lines(input) {
        let (line, text) = item?;
        let (a, b) = two_fields(line, &text)?;
        let (u, v) = (parse_node(line, &a)?, parse_node(line, &b)?);
        if u == v {
            return Err(Error::SelfLoop { line, node: u });
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(Error::DuplicateEdge { line, u, v });
        }
        edges.push((u, v));
    }
    Ok(edges)
}

/// Parses a category file into `external id -> category name`.
pub fn read_categories<R: BufRead>(input: R) -> Result<BTreeMap<u64, String>> {
    let mut labels = BTreeMap::new();
    for item in data_lines(input) {
        let (line, text) = item?;
        let (a, name) = two_fields(line, &text)?;
        let node = parse_node(line, &a)?;
        if labels.insert(node, name).is_some() {
            return Err(Error::DuplicateLabel { line, node });
        }
    }
    Ok(labels)
}

/// Builds the graph from parsed files. Every node appearing in either file
/// must carry a label.
pub fn build_graph(
    edges: &[(u64, u64)],
    labels: &BTreeMap<u64, String>,
) -> Result<(Graph, CategoryPartition)> {
    let mut ids: BTreeSet<u64> = labels.keys().copied().collect();
    for &(u, v) in edges {
        for node in [u, v] {
            if !labels.contains_key(&node) {
                return Err(Error::UnlabeledNode(node));
            }
            ids.insert(node);
        }
    }
    let dense: BTreeMap<u64, NodeId> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let names: Vec<String> = labels
        .values()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let by_name: BTreeMap<&str, CategoryId> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), CategoryId(i)))
        .collect();
    let node_labels = ids.iter().map(|id| by_name[labels[id].as_str()]).collect();
    let g = Graph::from_edges(ids.len(), edges.iter().map(|(u, v)| (dense[u], dense[v])))?;
    let part = CategoryPartition::new(node_labels, names)?;
    Ok((g, part))
}

pub fn load_graph(edge_path: &Path, category_path: &Path) -> Result<(Graph, CategoryPartition)> {
    let edges = read_edges(BufReader::new(File::open(edge_path)?))?;
    let labels = read_categories(BufReader::new(File::open(category_path)?))?;
    build_graph(&edges, &labels)
}

pub fn write_edges<W: Write>(g: &Graph, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    for (u, v) in g.edges() {
        writeln!(out, "{u}\t{v}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_categories<W: Write>(part: &CategoryPartition, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    for (v, c) in part.labels().iter().enumerate() {
        writeln!(out, "{v}\t{}", part.names()[c.index()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_graph(
    g: &Graph,
    part: &CategoryPartition,
    edge_path: &Path,
    category_path: &Path,
) -> Result<()> {
    write_edges(g, File::create(edge_path)?)?;
    write_categories(part, File::create(category_path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CategoryEntry {
    id: CategoryId,
    name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    size: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    size_var: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EdgeEntry {
    a: CategoryId,
    b: CategoryId,
    weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight_var: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum PopulationMode {
    Exact,
    Proportional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ExportDoc {
    #[serde(rename = "N_mode")]
    population_mode: PopulationMode,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none", default)]
    population: Option<usize>,
    size_estimator: String,
    weight_estimator: String,
    categories: Vec<CategoryEntry>,
    edges: Vec<EdgeEntry>,
}

fn estimator_name(kind: Option<EstimatorKind>) -> String {
    kind.map_or("exact", EstimatorKind::as_str).to_string()
}

fn parse_estimator(s: &str) -> Result<Option<EstimatorKind>> {
    if s == "exact" {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|m: String| Error::Parse {
        line: 0,
        message: m,
    })
}

fn to_doc(est: &CategoryGraphEstimate) -> ExportDoc {
    let (population_mode, population) = match est.population {
        Population::Exact(n) => (PopulationMode::Exact, Some(n)),
        Population::Proportional => (PopulationMode::Proportional, None),
    };
    ExportDoc {
        population_mode,
        population,
        size_estimator: estimator_name(est.size_estimator),
        weight_estimator: estimator_name(est.weight_estimator),
        categories: est
            .names
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let id = CategoryId(i);
                CategoryEntry {
                    id,
                    name: name.clone(),
                    size: est.sizes.get(&id).copied(),
                    size_var: est.size_variances.as_ref().and_then(|v| v.get(&id).copied()),
                }
            })
            .collect(),
        edges: est
            .weights
            .iter()
            .map(|(&p, &weight)| EdgeEntry {
                a: p.lo(),
                b: p.hi(),
                weight,
                weight_var: est.weight_variances.as_ref().and_then(|v| v.get(&p).copied()),
            })
            .collect(),
    }
}

/// Writes the category graph as JSON. Edges carry every estimated pair,
/// zeros included.
pub fn export_json<W: Write>(est: &CategoryGraphEstimate, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    serde_json::to_writer_pretty(&mut out, &to_doc(est))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn import_json<R: Read>(input: R) -> Result<CategoryGraphEstimate> {
    let doc: ExportDoc = serde_json::from_reader(input)?;
    let population = match (doc.population_mode, doc.population) {
        (PopulationMode::Exact, Some(n)) => Population::Exact(n),
        (PopulationMode::Proportional, _) => Population::Proportional,
        (PopulationMode::Exact, None) => {
            return Err(Error::Parse {
                line: 0,
                message: "N_mode is exact but N is missing".into(),
            })
        }
    };
    let has_size_var = doc.categories.iter().any(|c| c.size_var.is_some());
    let has_weight_var = doc.edges.iter().any(|e| e.weight_var.is_some());
    let mut names = Vec::with_capacity(doc.categories.len());
    let mut sizes = BTreeMap::new();
    let mut size_vars = BTreeMap::new();
    for (i, c) in doc.categories.into_iter().enumerate() {
        if c.id != CategoryId(i) {
            return Err(Error::Parse {
                line: 0,
                message: format!("category ids must be dense and ordered, found {}", c.id),
            });
        }
        names.push(c.name);
        if let Some(s) = c.size {
            sizes.insert(c.id, s);
        }
        if let Some(v) = c.size_var {
            size_vars.insert(c.id, v);
        }
    }
    let mut weights = BTreeMap::new();
    let mut weight_vars = BTreeMap::new();
    for e in doc.edges {
        if e.a.index() >= names.len() || e.b.index() >= names.len() {
            return Err(Error::UnknownCategory(if e.a.index() >= names.len() { e.a } else { e.b }));
        }
        let p = CategoryPair::new(e.a, e.b)?;
        weights.insert(p, e.weight);
        if let Some(v) = e.weight_var {
            weight_vars.insert(p, v);
        }
    }
    Ok(CategoryGraphEstimate {
        population,
        size_estimator: parse_estimator(&doc.size_estimator)?,
        weight_estimator: parse_estimator(&doc.weight_estimator)?,
        names,
        sizes,
        weights,
        size_variances: has_size_var.then_some(size_vars),
        weight_variances: has_weight_var.then_some(weight_vars),
    })
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering; only pairs with positive weight become edges.
pub fn export_dot<W: Write>(est: &CategoryGraphEstimate, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "graph category_graph {{")?;
    for (i, name) in est.names.iter().enumerate() {
        let id = CategoryId(i);
        match est.sizes.get(&id) {
            Some(s) => writeln!(out, "  {i} [label=\"{}\", size={s}];", dot_escape(name))?,
            None => writeln!(out, "  {i} [label=\"{}\"];", dot_escape(name))?,
        }
    }
    for (p, &w) in &est.weights {
        if w > 0.0 {
            writeln!(out, "  {} -- {} [weight={w}];", p.lo(), p.hi())?;
        }
    }
    writeln!(out, "}}")?;
    out.flush()?;
    Ok(())
}
