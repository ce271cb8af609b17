//! Node sampling designs. Every draw carries its unnormalized sampling weight
//! so that downstream estimators can apply Hansen-Hurwitz re-weighting.
//!
//! Walks start from `start` (or a uniformly chosen non-isolated node) and
//! record the position after every step; the start node itself is not a draw.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use log::warn;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CategoryId, CategoryPartition, Graph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Uis,
    Wis,
    Rw,
    Mhrw,
    Wrw,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 5] = [
        SamplerKind::Uis,
        SamplerKind::Wis,
        SamplerKind::Rw,
        SamplerKind::Mhrw,
        SamplerKind::Wrw,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SamplerKind::Uis => "uis",
            SamplerKind::Wis => "wis",
            SamplerKind::Rw => "rw",
            SamplerKind::Mhrw => "mhrw",
            SamplerKind::Wrw => "wrw",
        }
    }

    pub fn is_walk(self) -> bool {
        matches!(self, SamplerKind::Rw | SamplerKind::Mhrw | SamplerKind::Wrw)
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SamplerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        SamplerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown sampler `{s}`"))
    }
}

/// One sampled node and its (unnormalized) sampling weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    #[serde(rename = "i")]
    pub step: usize,
    #[serde(rename = "v")]
    pub node: NodeId,
    #[serde(rename = "w")]
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub sampler: SamplerKind,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default = "one")]
    pub thin: usize,
    #[serde(default = "one")]
    pub walks: usize,
    /// Start node of every walk, in walk order. Empty for independence samplers.
    #[serde(default)]
    pub starts: Vec<NodeId>,
}

fn one() -> usize {
    1
}

impl TraceMeta {
    fn new(sampler: SamplerKind) -> Self {
        Self {
            sampler,
            seed: None,
            burn_in: 0,
            thin: 1,
            walks: 1,
            starts: Vec::new(),
        }
    }
}

/// Ordered multiset of draws; repeated nodes are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTrace {
    pub meta: TraceMeta,
    pub draws: Vec<Draw>,
}

impl SampleTrace {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.draws.iter().map(|d| d.node)
    }

    /// Builds an unnamed trace from `(node, weight)` pairs.
    pub fn from_draws(sampler: SamplerKind, draws: impl IntoIterator<Item = (NodeId, f64)>) -> Self {
        Self {
            meta: TraceMeta::new(sampler),
            draws: draws
                .into_iter()
                .enumerate()
                .map(|(step, (node, weight))| Draw { step, node, weight })
                .collect(),
        }
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer(&mut out, &self.meta)?;
        out.write_all(b"\n")?;
        for draw in &self.draws {
            serde_json::to_writer(&mut out, draw)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate().filter(|(_, l)| {
            l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true)
        });
        let (_, first) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing trace meta line".into(),
        })?;
        let meta: TraceMeta = parse_json_line(&first?, 1)?;
        let mut draws = Vec::new();
        for (idx, line) in lines {
            let draw: Draw = parse_json_line(&line?, idx + 1)?;
            if !(draw.weight > 0.0 && draw.weight.is_finite()) {
                return Err(Error::InvalidWeight {
                    node: draw.node,
                    weight: draw.weight,
                });
            }
            draws.push(draw);
        }
        Ok(Self { meta, draws })
    }
}

pub(crate) fn parse_json_line<T: serde::de::DeserializeOwned>(line: &str, number: usize) -> Result<T> {
    serde_json::from_str(line).map_err(|e| Error::Parse {
        line: number,
        message: e.to_string(),
    })
}

fn check_n(g: &Graph, n: usize) -> Result<()> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    if n == 0 {
        return Err(Error::InvalidSampleSize);
    }
    Ok(())
}

fn check_start(g: &Graph, start: NodeId) -> Result<()> {
    g.check_node(start)?;
    if g.degree(start) == 0 {
        return Err(Error::IsolatedStartNode(start));
    }
    let component = g.component_of(start);
    let covered = component.iter().filter(|&&c| c).count();
    if covered < g.node_count() {
        warn!(
            "walk from node {start} can reach only {covered} of {} nodes",
            g.node_count()
        );
    }
    Ok(())
}

/// Uniform independence sampling with replacement; all weights are 1.
pub fn sample_uis<R: Rng + ?Sized>(g: &Graph, n: usize, rng: &mut R) -> Result<SampleTrace> {
    check_n(g, n)?;
    let nodes = g.node_count();
    Ok(SampleTrace::from_draws(
        SamplerKind::Uis,
        (0..n).map(|_| (rng.gen_range(0..nodes), 1.0)),
    ))
}

/// Weighted independence sampling, `P(v) ∝ weights[v]`.
pub fn sample_wis<R: Rng + ?Sized>(
    g: &Graph,
    weights: &[f64],
    n: usize,
    rng: &mut R,
) -> Result<SampleTrace> {
    check_n(g, n)?;
    if weights.len() != g.node_count() {
        return Err(Error::InvalidNode(weights.len().min(g.node_count())));
    }
    if let Some((node, &weight)) = weights
        .iter()
        .enumerate()
        .find(|(_, &w)| !(w > 0.0 && w.is_finite()))
    {
        return Err(Error::InvalidWeight { node, weight });
    }
    let dist = WeightedIndex::new(weights).map_err(|_| Error::InvalidWeight {
        node: 0,
        weight: f64::NAN,
    })?;
    Ok(SampleTrace::from_draws(
        SamplerKind::Wis,
        (0..n).map(|_| {
            let v = dist.sample(rng);
            (v, weights[v])
        }),
    ))
}

fn walk<R, F>(
    kind: SamplerKind,
    n: usize,
    start: NodeId,
    burn_in: usize,
    rng: &mut R,
    mut step: F,
) -> SampleTrace
where
    R: Rng + ?Sized,
    F: FnMut(NodeId, &mut R) -> (NodeId, f64),
{
    let mut current = start;
    for _ in 0..burn_in {
        current = step(current, rng).0;
    }
    let mut draws = Vec::with_capacity(n);
    for i in 0..n {
        let (next, weight) = step(current, rng);
        current = next;
        draws.push(Draw {
            step: i,
            node: current,
            weight,
        });
    }
    let mut meta = TraceMeta::new(kind);
    meta.burn_in = burn_in;
    meta.starts = vec![start];
    SampleTrace { meta, draws }
}

#[inline]
fn uniform_neighbor<R: Rng + ?Sized>(g: &Graph, u: NodeId, rng: &mut R) -> NodeId {
    let nbrs = g.neighbors(u);
    nbrs[rng.gen_range(0..nbrs.len())]
}

/// Simple random walk; draw weight `deg(v)`.
pub fn sample_rw<R: Rng + ?Sized>(
    g: &Graph,
    n: usize,
    start: NodeId,
    burn_in: usize,
    rng: &mut R,
) -> Result<SampleTrace> {
    check_n(g, n)?;
    check_start(g, start)?;
    Ok(walk(SamplerKind::Rw, n, start, burn_in, rng, |u, rng| {
        let v = uniform_neighbor(g, u, rng);
        (v, g.degree(v) as f64)
    }))
}

/// Metropolis-Hastings walk targeting the uniform distribution. A rejected
/// proposal repeats the current node as the next draw. All weights are 1.
pub fn sample_mhrw<R: Rng + ?Sized>(
    g: &Graph,
    n: usize,
    start: NodeId,
    burn_in: usize,
    rng: &mut R,
) -> Result<SampleTrace> {
    check_n(g, n)?;
    check_start(g, start)?;
    Ok(walk(SamplerKind::Mhrw, n, start, burn_in, rng, |u, rng| {
        let v = uniform_neighbor(g, u, rng);
        let (du, dv) = (g.degree(u), g.degree(v));
        let accept = dv <= du || rng.gen::<f64>() * (dv as f64) < du as f64;
        (if accept { v } else { u }, 1.0)
    }))
}

/// Edge weights `cw(label(u)) + cw(label(v))` and per-node cumulative sums
/// used to pick the next hop of a weighted walk.
#[derive(Debug, Clone)]
pub struct WeightedWalkTable {
    cumulative: Vec<Vec<f64>>,
}

impl WeightedWalkTable {
    pub fn new(g: &Graph, part: &CategoryPartition, category_weights: &[f64]) -> Result<Self> {
        part.check_graph(g)?;
        if category_weights.len() != part.category_count() {
            return Err(Error::UnknownCategory(CategoryId(
                category_weights.len().min(part.category_count()),
            )));
        }
        if let Some((c, &weight)) = category_weights
            .iter()
            .enumerate()
            .find(|(_, &w)| !(w > 0.0 && w.is_finite()))
        {
            return Err(Error::InvalidCategoryWeight {
                category: CategoryId(c),
                weight,
            });
        }
        let cumulative = (0..g.node_count())
            .map(|u| {
                let wu = category_weights[part.label(u).index()];
                let mut acc = 0.0;
                g.neighbors(u)
                    .iter()
                    .map(|&v| {
                        acc += wu + category_weights[part.label(v).index()];
                        acc
                    })
                    .collect()
            })
            .collect();
        Ok(Self { cumulative })
    }

    /// Sum of incident edge weights, the stationary weight of `v`.
    #[inline]
    pub fn node_weight(&self, v: NodeId) -> f64 {
        self.cumulative[v].last().copied().unwrap_or(0.0)
    }

    /// Probability of stepping from `u` to its `i`-th neighbor.
    pub fn transition(&self, u: NodeId, i: usize) -> f64 {
        let cum = &self.cumulative[u];
        let lower = if i == 0 { 0.0 } else { cum[i - 1] };
        (cum[i] - lower) / self.node_weight(u)
    }

    #[inline]
    fn next<R: Rng + ?Sized>(&self, g: &Graph, u: NodeId, rng: &mut R) -> NodeId {
        let cum = &self.cumulative[u];
        let r = rng.gen::<f64>() * self.node_weight(u);
        let idx = cum.partition_point(|&c| c <= r).min(cum.len() - 1);
        g.neighbors(u)[idx]
    }
}

/// Weighted random walk on category-derived edge weights; draw weight is the
/// sum of incident edge weights of the visited node.
pub fn sample_wrw<R: Rng + ?Sized>(
    g: &Graph,
    part: &CategoryPartition,
    category_weights: &[f64],
    n: usize,
    start: NodeId,
    burn_in: usize,
    rng: &mut R,
) -> Result<SampleTrace> {
    let table = WeightedWalkTable::new(g, part, category_weights)?;
    sample_wrw_with_table(g, &table, n, start, burn_in, rng)
}

pub fn sample_wrw_with_table<R: Rng + ?Sized>(
    g: &Graph,
    table: &WeightedWalkTable,
    n: usize,
    start: NodeId,
    burn_in: usize,
    rng: &mut R,
) -> Result<SampleTrace> {
    check_n(g, n)?;
    check_start(g, start)?;
    Ok(walk(SamplerKind::Wrw, n, start, burn_in, rng, |u, rng| {
        let v = table.next(g, u, rng);
        (v, table.node_weight(v))
    }))
}

/// Keeps draws at positions `0, t, 2t, ...`.
pub fn thin(trace: &SampleTrace, t: usize) -> Result<SampleTrace> {
    if t == 0 {
        return Err(Error::InvalidThinning);
    }
    let mut meta = trace.meta.clone();
    meta.thin *= t;
    Ok(SampleTrace {
        meta,
        draws: trace.draws.iter().step_by(t).copied().collect(),
    })
}

/// Sampler choice together with its design parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Design {
    Uis,
    Wis { weights: Vec<f64> },
    Rw,
    Mhrw,
    Wrw { category_weights: Vec<f64> },
}

impl Design {
    pub fn kind(&self) -> SamplerKind {
        match self {
            Design::Uis => SamplerKind::Uis,
            Design::Wis { .. } => SamplerKind::Wis,
            Design::Rw => SamplerKind::Rw,
            Design::Mhrw => SamplerKind::Mhrw,
            Design::Wrw { .. } => SamplerKind::Wrw,
        }
    }

    /// Default parameters: degree weights for WIS, equal category weights for WRW.
    pub fn default_for(kind: SamplerKind, g: &Graph, part: &CategoryPartition) -> Self {
        match kind {
            SamplerKind::Uis => Design::Uis,
            SamplerKind::Wis => Design::Wis {
                weights: (0..g.node_count())
                    .map(|v| (g.degree(v) as f64).max(f64::MIN_POSITIVE))
                    .collect(),
            },
            SamplerKind::Rw => Design::Rw,
            SamplerKind::Mhrw => Design::Mhrw,
            SamplerKind::Wrw => Design::Wrw {
                category_weights: vec![1.0; part.category_count()],
            },
        }
    }
}

/// Full description of one (possibly multi-walk) sampling run.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub design: Design,
    /// Draws per walk (or per independent batch).
    pub n: usize,
    pub walks: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub start: Option<NodeId>,
    pub seed: u64,
}

impl SamplingPlan {
    pub fn new(design: Design, n: usize, seed: u64) -> Self {
        Self {
            design,
            n,
            walks: 1,
            burn_in: 0,
            thin: 1,
            start: None,
            seed,
        }
    }
}

/// SplitMix64 finalizer; derives independent stream seeds from a base seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Picks a walk start uniformly among non-isolated nodes.
pub fn random_start<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> Result<NodeId> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    if g.edge_count() == 0 {
        return Err(Error::IsolatedStartNode(0));
    }
    loop {
        let v = rng.gen_range(0..g.node_count());
        if g.degree(v) > 0 {
            return Ok(v);
        }
    }
}

/// Runs `plan` with one ChaCha stream per walk and merges the walks, in walk
/// order, into a single trace. Each walk is thinned before merging.
pub fn run_plan(g: &Graph, part: &CategoryPartition, plan: &SamplingPlan) -> Result<SampleTrace> {
    if plan.walks == 0 {
        return Err(Error::InvalidSampleSize);
    }
    if plan.thin == 0 {
        return Err(Error::InvalidThinning);
    }
    let table = match &plan.design {
        Design::Wrw { category_weights } => Some(WeightedWalkTable::new(g, part, category_weights)?),
        _ => None,
    };
    let seed = |w: usize| {
        if plan.walks == 1 {
            plan.seed
        } else {
            derive_seed(plan.seed, w as u64)
        }
    };
    let one_walk = |w: usize| -> Result<SampleTrace> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed(w));
        let trace = match &plan.design {
            Design::Uis => sample_uis(g, plan.n, &mut rng)?,
            Design::Wis { weights } => sample_wis(g, weights, plan.n, &mut rng)?,
            walk_design => {
                let s = match plan.start {
                    Some(s) => s,
                    None => random_start(g, &mut rng)?,
                };
                match walk_design {
                    Design::Rw => sample_rw(g, plan.n, s, plan.burn_in, &mut rng)?,
                    Design::Mhrw => sample_mhrw(g, plan.n, s, plan.burn_in, &mut rng)?,
                    _ => sample_wrw_with_table(
                        g,
                        table.as_ref().expect("table built for WRW"),
                        plan.n,
                        s,
                        plan.burn_in,
                        &mut rng,
                    )?,
                }
            }
        };
        thin(&trace, plan.thin)
    };
    let traces: Vec<SampleTrace> = if plan.walks == 1 {
        vec![one_walk(0)?]
    } else {
        (0..plan.walks)
            .into_par_iter()
            .map(one_walk)
            .collect::<Result<_>>()?
    };

    let mut meta = TraceMeta::new(plan.design.kind());
    meta.seed = Some(plan.seed);
    meta.burn_in = plan.burn_in;
    meta.thin = plan.thin;
    meta.walks = plan.walks;
    let mut draws = Vec::with_capacity(traces.iter().map(SampleTrace::len).sum());
    for (w, trace) in traces.into_iter().enumerate() {
        meta.starts.extend(trace.meta.starts);
        draws.extend(trace.draws.into_iter().map(|d| Draw {
            step: w * plan.n + d.step,
            ..d
        }));
    }
    Ok(SampleTrace { meta, draws })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn star_k13() -> Graph {
        Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap()
    }

    fn frequencies(trace: &SampleTrace, n: usize) -> Vec<f64> {
        let mut counts = vec![0usize; n];
        for v in trace.nodes() {
            counts[v] += 1;
        }
        counts
            .into_iter()
            .map(|c| c as f64 / trace.len() as f64)
            .collect()
    }

    #[test]
    fn uis_single_node() {
        let g = Graph::from_edges(1, []).unwrap();
        let trace = sample_uis(&g, 10, &mut rng(0)).unwrap();
        assert!(trace.draws.iter().all(|d| d.node == 0 && d.weight == 1.0));
        assert_eq!(trace.len(), 10);
    }

    #[test]
    fn uis_errors() {
        let empty = Graph::from_edges(0, []).unwrap();
        assert!(matches!(sample_uis(&empty, 5, &mut rng(0)), Err(Error::EmptyGraph)));
        let g = star_k13();
        assert!(matches!(sample_uis(&g, 0, &mut rng(0)), Err(Error::InvalidSampleSize)));
    }

    #[test]
    fn uis_on_triangle_is_uniform() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let trace = sample_uis(&g, 1_000_000, &mut rng(1)).unwrap();
        for f in frequencies(&trace, 3) {
            assert!((f - 1.0 / 3.0).abs() < 0.005, "{f}");
        }
    }

    #[test]
    fn wis_degree_weights_on_path() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let trace = sample_wis(&g, &[1.0, 2.0, 1.0], 1_000_000, &mut rng(2)).unwrap();
        let f = frequencies(&trace, 3);
        assert!((f[1] - 0.5).abs() < 0.005);
        assert!(trace.draws.iter().all(|d| d.weight == [1.0, 2.0, 1.0][d.node]));
    }

    #[test]
    fn wis_rejects_zero_weight() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert!(matches!(
            sample_wis(&g, &[1.0, 0.0, 1.0], 10, &mut rng(3)),
            Err(Error::InvalidWeight { node: 1, .. })
        ));
        assert!(matches!(
            sample_wis(&g, &[1.0, f64::INFINITY, 1.0], 10, &mut rng(3)),
            Err(Error::InvalidWeight { node: 1, .. })
        ));
    }

    #[test]
    fn rw_single_step_is_neighbor() {
        let g = star_k13();
        for seed in 0..10 {
            let trace = sample_rw(&g, 1, 0, 0, &mut rng(seed)).unwrap();
            assert_eq!(trace.len(), 1);
            assert!(g.has_edge(0, trace.draws[0].node));
            assert_eq!(trace.draws[0].weight, 1.0);
        }
    }

    #[test]
    fn rw_rejects_isolated_start() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert!(matches!(
            sample_rw(&g, 5, 2, 0, &mut rng(0)),
            Err(Error::IsolatedStartNode(2))
        ));
        assert!(matches!(
            sample_mhrw(&g, 5, 2, 0, &mut rng(0)),
            Err(Error::IsolatedStartNode(2))
        ));
    }

    #[test]
    fn rw_on_star_visits_center_half_the_time() {
        let trace = sample_rw(&star_k13(), 1_000_000, 1, 0, &mut rng(4)).unwrap();
        let f = frequencies(&trace, 4);
        assert!((f[0] / 0.5 - 1.0).abs() < 0.02);
        assert!(trace.draws.iter().all(|d| d.weight == if d.node == 0 { 3.0 } else { 1.0 }));
    }

    #[test]
    fn rw_on_cycle_is_uniform() {
        let n = 7;
        let g = Graph::from_edges(n, (0..n).map(|v| (v, (v + 1) % n))).unwrap();
        let trace = sample_rw(&g, 1_000_000, 0, 0, &mut rng(5)).unwrap();
        for f in frequencies(&trace, n) {
            assert!((f * n as f64 - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn mhrw_on_star_is_uniform() {
        let trace = sample_mhrw(&star_k13(), 1_000_000, 0, 0, &mut rng(6)).unwrap();
        for f in frequencies(&trace, 4) {
            assert!((f * 4.0 - 1.0).abs() < 0.02, "{f}");
        }
        assert!(trace.draws.iter().all(|d| d.weight == 1.0));
    }

    #[test]
    fn mhrw_acceptance_rule() {
        // From the center every proposal (to a leaf) is accepted.
        let g = star_k13();
        for seed in 0..50 {
            let t = sample_mhrw(&g, 1, 0, 0, &mut rng(seed)).unwrap();
            assert_ne!(t.draws[0].node, 0);
        }
        // From a leaf the move to the center is accepted w.p. 1/3.
        let trials = 30_000;
        let accepted = (0..trials)
            .filter(|&s| sample_mhrw(&g, 1, 1, 0, &mut rng(1000 + s)).unwrap().draws[0].node == 0)
            .count();
        let p = accepted as f64 / trials as f64;
        assert!((p - 1.0 / 3.0).abs() < 0.01, "{p}");
    }

    #[test]
    fn mhrw_consecutive_draws_adjacent_or_repeated() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 3), (0, 4)]).unwrap();
        let t = sample_mhrw(&g, 5000, 0, 10, &mut rng(7)).unwrap();
        for w in t.draws.windows(2) {
            assert!(w[0].node == w[1].node || g.has_edge(w[0].node, w[1].node));
        }
    }

    #[test]
    fn wrw_transition_on_two_category_path() {
        // A - B - B with cat_w(A)=10, cat_w(B)=1: from the middle, 11 vs 2.
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let part = CategoryPartition::with_generated_names(
            vec![CategoryId(0), CategoryId(1), CategoryId(1)],
            2,
        )
        .unwrap();
        let table = WeightedWalkTable::new(&g, &part, &[10.0, 1.0]).unwrap();
        assert!((table.transition(1, 0) - 11.0 / 13.0).abs() < 1e-15);
        assert_eq!(table.node_weight(1), 13.0);

        let trials = 100_000;
        let to_a = (0..trials)
            .filter(|&s| sample_wrw_with_table(&g, &table, 1, 1, 0, &mut rng(s)).unwrap().draws[0].node == 0)
            .count();
        assert!((to_a as f64 / trials as f64 - 11.0 / 13.0).abs() < 0.005);
    }

    #[test]
    fn wrw_equal_weights_matches_degree() {
        let g = star_k13();
        let part = CategoryPartition::with_generated_names(
            vec![CategoryId(0), CategoryId(1), CategoryId(0), CategoryId(1)],
            2,
        )
        .unwrap();
        let table = WeightedWalkTable::new(&g, &part, &[3.0, 3.0]).unwrap();
        for v in 0..4 {
            assert_eq!(table.node_weight(v), 6.0 * g.degree(v) as f64);
        }
        assert!(matches!(
            WeightedWalkTable::new(&g, &part, &[1.0, 0.0]),
            Err(Error::InvalidCategoryWeight { .. })
        ));
    }

    #[test]
    fn thin_examples() {
        let trace = SampleTrace::from_draws(SamplerKind::Uis, (0..10).map(|v| (v, 1.0)));
        assert_eq!(thin(&trace, 1).unwrap().draws, trace.draws);
        let t3 = thin(&trace, 3).unwrap();
        assert_eq!(t3.nodes().collect::<Vec<_>>(), vec![0, 3, 6, 9]);
        assert_eq!(t3.draws.iter().map(|d| d.step).collect::<Vec<_>>(), vec![0, 3, 6, 9]);
        assert_eq!(t3.meta.thin, 3);
        assert!(matches!(thin(&trace, 0), Err(Error::InvalidThinning)));

        let rw = sample_rw(&star_k13(), 100, 0, 0, &mut rng(8)).unwrap();
        let thinned = thin(&rw, 4).unwrap();
        assert!(thinned
            .draws
            .iter()
            .all(|d| d.weight == star_k13().degree(d.node) as f64));
    }

    #[test]
    fn plans_are_deterministic() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)]).unwrap();
        let part = CategoryPartition::with_generated_names(vec![CategoryId(0); 5], 1).unwrap();
        for kind in SamplerKind::ALL {
            let mut plan = SamplingPlan::new(Design::default_for(kind, &g, &part), 200, 42);
            plan.walks = 3;
            plan.thin = 2;
            let a = run_plan(&g, &part, &plan).unwrap();
            let b = run_plan(&g, &part, &plan).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), 300);
            if kind.is_walk() {
                assert_eq!(a.meta.starts.len(), 3);
            }
        }
    }

    #[test]
    fn trace_jsonl_round_trip() {
        let g = star_k13();
        let part = CategoryPartition::with_generated_names(vec![CategoryId(0); 4], 1).unwrap();
        let plan = SamplingPlan::new(Design::Rw, 20, 3);
        let trace = run_plan(&g, &part, &plan).unwrap();
        let mut buf = Vec::new();
        trace.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"sampler\":\"rw\",\"seed\":3,"));
        assert!(text.lines().nth(1).unwrap().starts_with("{\"i\":0,\"v\":"));
        assert_eq!(SampleTrace::read_jsonl(&buf[..]).unwrap(), trace);
    }
}
