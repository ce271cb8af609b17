//! NRMSE and the replicate experiment runner: error versus sample size for
//! every sampler x observation mode x estimator combination, measured against
//! the exact category graph.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    available, est_size_induced, est_size_star, est_weight_induced, est_weight_star, EstimatorKind,
    Estimates, Quantity,
};
use crate::generators::{synthetic_graph, SyntheticParams};
use crate::graph::{exact_category_graph, CategoryGraph, CategoryId, CategoryPair, CategoryPartition, Graph};
use crate::io::load_graph;
use crate::observers::{observe, ObservationMode};
use crate::samplers::{derive_seed, run_plan, Design, SamplerKind, SamplingPlan};

/// `sqrt(mean((x̂ - x)²)) / x` over replicate estimates.
pub fn nrmse(estimates: &[f64], truth: f64) -> Result<f64> {
    if truth == 0.0 {
        return Err(Error::UndefinedNrmse);
    }
    if estimates.is_empty() {
        return Err(Error::EmptySample);
    }
    let mse = estimates.iter().map(|x| (x - truth).powi(2)).sum::<f64>() / estimates.len() as f64;
    Ok(mse.sqrt() / truth.abs())
}

/// Linear-interpolation quantile of sorted data, `q` in `[0, 1]`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GraphSource {
    Synthetic(SyntheticParams),
    Files { edges: PathBuf, categories: PathBuf },
}

fn default_replicates() -> usize {
    30
}

fn default_thin() -> usize {
    1
}

fn default_probes() -> Vec<f64> {
    vec![25.0, 75.0]
}

fn default_feed() -> EstimatorKind {
    EstimatorKind::Induced
}

/// Declarative description of an experiment grid.
///
/// ```toml
/// seed = 1
/// replicates = 30
/// sample_sizes = [500, 5000]
/// samplers = ["uis", "rw"]
/// modes = ["induced", "star"]
/// size_estimators = ["induced", "star"]
/// weight_estimators = ["induced", "star"]
///
/// [graph]
/// kind = "synthetic"
/// category_sizes = [100, 200, 700]
/// k = 10
/// alpha = 0.5
/// seed = 7
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub samplers: Vec<SamplerKind>,
    pub modes: Vec<ObservationMode>,
    pub size_estimators: Vec<EstimatorKind>,
    pub weight_estimators: Vec<EstimatorKind>,
    /// Retained draws per replicate, strictly increasing.
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default = "default_thin")]
    pub thin: usize,
    /// Size estimator feeding `|Â|` into the star weight estimator.
    #[serde(default = "default_feed")]
    pub weight_size_feed: EstimatorKind,
    /// WRW category weights; equal weights when absent.
    #[serde(default)]
    pub category_weights: Option<Vec<f64>>,
    /// Weight percentiles of the true edge weights to track individually.
    #[serde(default = "default_probes")]
    pub probes: Vec<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.replicates < 2 {
            return bad("replicates must be at least 2");
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.contains(&0) {
            return bad("sample_sizes must be non-empty and positive");
        }
        if self.sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sample_sizes must be strictly increasing");
        }
        if self.samplers.is_empty() || self.modes.is_empty() {
            return bad("at least one sampler and one mode are required");
        }
        if self.thin == 0 {
            return Err(Error::InvalidThinning);
        }
        if self.probes.iter().any(|p| !(0.0..=100.0).contains(p)) {
            return bad("probe percentiles must lie in [0, 100]");
        }
        Ok(())
    }

    pub fn load_graph(&self) -> Result<(Graph, CategoryPartition)> {
        match &self.graph {
            GraphSource::Synthetic(params) => synthetic_graph(params),
            GraphSource::Files { edges, categories } => load_graph(edges, categories),
        }
    }
}

/// Identifies one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub quantity: Quantity,
    pub sampler: SamplerKind,
    pub mode: ObservationMode,
    pub estimator: EstimatorKind,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityError {
    /// Category id, or `a-b` for an edge.
    pub key: String,
    pub truth: f64,
    pub nrmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub percentile: f64,
    pub key: String,
    pub truth: f64,
    pub nrmse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    #[serde(flatten)]
    pub key: CellKey,
    pub median_nrmse: Option<f64>,
    pub p25: Option<f64>,
    pub p75: Option<f64>,
    /// Quantities dropped because some replicate could not estimate them.
    pub excluded_count: usize,
    pub per_quantity: Vec<QuantityError>,
    /// Empirical CDF over `per_quantity`: `(nrmse, fraction <= nrmse)`.
    pub cdf: Vec<(f64, f64)>,
    pub probes: Vec<Probe>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub node_count: usize,
    pub edge_count: usize,
    pub replicates: usize,
    pub seed: u64,
    pub cells: Vec<CellReport>,
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    quantity_kind: String,
    sampler: &'a str,
    mode: &'a str,
    estimator: &'a str,
    n: usize,
    median_nrmse: Option<f64>,
    p25: Option<f64>,
    p75: Option<f64>,
    excluded_count: usize,
}

impl ExperimentReport {
    pub fn cell(
        &self,
        quantity: Quantity,
        sampler: SamplerKind,
        mode: ObservationMode,
        estimator: EstimatorKind,
        n: usize,
    ) -> Option<&CellReport> {
        let key = CellKey {
            quantity,
            sampler,
            mode,
            estimator,
            n,
        };
        self.cells.iter().find(|c| c.key == key)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for c in &self.cells {
            w.serialize(CsvRow {
                quantity_kind: c.key.quantity.to_string(),
                sampler: c.key.sampler.as_str(),
                mode: c.key.mode.as_str(),
                estimator: c.key.estimator.as_str(),
                n: c.key.n,
                median_nrmse: c.median_nrmse,
                p25: c.p25,
                p75: c.p75,
                excluded_count: c.excluded_count,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

/// Estimates produced by one replicate, per cell.
enum CellEstimates {
    Sizes(Estimates<CategoryId>),
    Weights(Estimates<CategoryPair>),
}

struct Task {
    sampler_index: usize,
    sampler: SamplerKind,
    n: usize,
    replicate: usize,
}

fn cells_for(cfg: &ExperimentConfig, sampler: SamplerKind, n: usize) -> Vec<CellKey> {
    let mut cells = Vec::new();
    for &mode in &cfg.modes {
        for &estimator in &cfg.size_estimators {
            if estimator == EstimatorKind::Star && mode != ObservationMode::Star {
                continue;
            }
            cells.push(CellKey {
                quantity: Quantity::Size,
                sampler,
                mode,
                estimator,
                n,
            });
        }
        for &estimator in &cfg.weight_estimators {
            let needs = match estimator {
                EstimatorKind::Induced => ObservationMode::Induced,
                EstimatorKind::Star => ObservationMode::Star,
            };
            if needs != mode {
                continue;
            }
            cells.push(CellKey {
                quantity: Quantity::Weight,
                sampler,
                mode,
                estimator,
                n,
            });
        }
    }
    cells
}

fn warn_skipped(cfg: &ExperimentConfig) {
    for &mode in &cfg.modes {
        if mode == ObservationMode::Induced {
            if cfg.size_estimators.contains(&EstimatorKind::Star) {
                warn!("skipping star size estimation on induced logs");
            }
            if cfg.weight_estimators.contains(&EstimatorKind::Star) {
                warn!("skipping star weight estimation on induced logs");
            }
        } else if cfg.weight_estimators.contains(&EstimatorKind::Induced) {
            warn!("skipping induced weight estimation on star logs");
        }
    }
}

fn run_replicate(
    g: &Graph,
    part: &CategoryPartition,
    cfg: &ExperimentConfig,
    task: &Task,
) -> Result<BTreeMap<CellKey, CellEstimates>> {
    let seed = derive_seed(
        derive_seed(derive_seed(cfg.seed, task.sampler_index as u64), task.n as u64),
        task.replicate as u64,
    );
    let design = match (task.sampler, &cfg.category_weights) {
        (SamplerKind::Wrw, Some(w)) => Design::Wrw {
            category_weights: w.clone(),
        },
        (kind, _) => Design::default_for(kind, g, part),
    };
    let mut plan = SamplingPlan::new(design, task.n * cfg.thin, seed);
    plan.burn_in = cfg.burn_in;
    plan.thin = cfg.thin;
    let trace = run_plan(g, part, &plan)?;
    let population = g.node_count() as f64;

    let mut out = BTreeMap::new();
    for &mode in &cfg.modes {
        let log = observe(g, part, &trace, mode)?;
        let cells = cells_for(cfg, task.sampler, task.n);
        let mut sizes_by: BTreeMap<EstimatorKind, Estimates<CategoryId>> = BTreeMap::new();
        let mut size_for = |kind: EstimatorKind| -> Result<Estimates<CategoryId>> {
            if let Some(s) = sizes_by.get(&kind) {
                return Ok(s.clone());
            }
            let s = match kind {
                EstimatorKind::Induced => est_size_induced(&log, population)?,
                EstimatorKind::Star => est_size_star(&log, population, false)?,
            };
            sizes_by.insert(kind, s.clone());
            Ok(s)
        };
        for key in cells.into_iter().filter(|k| k.mode == mode) {
            let est = match (key.quantity, key.estimator) {
                (Quantity::Size, kind) => CellEstimates::Sizes(size_for(kind)?),
                (Quantity::Weight, EstimatorKind::Induced) => {
                    CellEstimates::Weights(est_weight_induced(&log)?)
                }
                (Quantity::Weight, EstimatorKind::Star) => {
                    let feed = available(&size_for(cfg.weight_size_feed)?);
                    CellEstimates::Weights(est_weight_star(&log, &feed)?)
                }
            };
            out.insert(key, est);
        }
    }
    Ok(out)
}

fn summarize<K: Ord + Copy + std::fmt::Display>(
    key: CellKey,
    truth: &BTreeMap<K, f64>,
    replicates: &[&Estimates<K>],
    probes: &[(f64, K)],
) -> CellReport {
    let mut per_quantity = Vec::new();
    let mut excluded_count = 0;
    let mut by_key: BTreeMap<K, f64> = BTreeMap::new();
    for (&k, &t) in truth {
        let values: Option<Vec<f64>> = replicates
            .iter()
            .map(|rep| rep.get(&k).and_then(|r| r.ok()))
            .collect();
        match values.map(|v| nrmse(&v, t)) {
            Some(Ok(e)) => {
                by_key.insert(k, e);
                per_quantity.push(QuantityError {
                    key: k.to_string(),
                    truth: t,
                    nrmse: e,
                });
            }
            _ => excluded_count += 1,
        }
    }
    let mut sorted: Vec<f64> = per_quantity.iter().map(|q| q.nrmse).collect();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let cdf = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, (i + 1) as f64 / m))
        .collect();
    CellReport {
        key,
        median_nrmse: quantile_sorted(&sorted, 0.5),
        p25: quantile_sorted(&sorted, 0.25),
        p75: quantile_sorted(&sorted, 0.75),
        excluded_count,
        per_quantity,
        cdf,
        probes: probes
            .iter()
            .map(|&(p, k)| Probe {
                percentile: p,
                key: k.to_string(),
                truth: truth[&k],
                nrmse: by_key.get(&k).copied(),
            })
            .collect(),
    }
}

/// Picks, for each percentile, the true edge at that rank of the weight
/// distribution.
fn probe_edges(exact: &CategoryGraph, percentiles: &[f64]) -> Vec<(f64, CategoryPair)> {
    let mut ranked: Vec<(f64, CategoryPair)> = exact.weights.iter().map(|(&k, &w)| (w, k)).collect();
    if ranked.is_empty() {
        return Vec::new();
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    percentiles
        .iter()
        .map(|&p| {
            let idx = ((p / 100.0) * (ranked.len() - 1) as f64).round() as usize;
            (p, ranked[idx].1)
        })
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let (g, part) = cfg.load_graph()?;
    run_experiment_on(&g, &part, cfg)
}

/// Runs the grid on an already loaded graph. Replicates run in parallel;
/// aggregation is ordered by replicate index, so the report depends only on
/// the config.
pub fn run_experiment_on(
    g: &Graph,
    part: &CategoryPartition,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    warn_skipped(cfg);
    let exact = exact_category_graph(g, part)?;
    let true_sizes: BTreeMap<CategoryId, f64> = exact
        .sizes
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0)
        .map(|(c, &s)| (CategoryId(c), s as f64))
        .collect();
    let probes = probe_edges(&exact, &cfg.probes);

    let tasks: Vec<Task> = cfg
        .samplers
        .iter()
        .enumerate()
        .flat_map(|(sampler_index, &sampler)| {
            cfg.sample_sizes.iter().flat_map(move |&n| {
                (0..cfg.replicates).map(move |replicate| Task {
                    sampler_index,
                    sampler,
                    n,
                    replicate,
                })
            })
        })
        .collect();
    let results: Vec<BTreeMap<CellKey, CellEstimates>> = tasks
        .par_iter()
        .map(|task| run_replicate(g, part, cfg, task))
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for (i, &sampler) in cfg.samplers.iter().enumerate() {
        for (j, &n) in cfg.sample_sizes.iter().enumerate() {
            let start = (i * cfg.sample_sizes.len() + j) * cfg.replicates;
            let reps = &results[start..start + cfg.replicates];
            for key in cells_for(cfg, sampler, n) {
                let report = match key.quantity {
                    Quantity::Size => {
                        let per: Vec<&Estimates<CategoryId>> = reps
                            .iter()
                            .map(|r| match &r[&key] {
                                CellEstimates::Sizes(s) => s,
                                CellEstimates::Weights(_) => unreachable!("size cell"),
                            })
                            .collect();
                        summarize(key, &true_sizes, &per, &[])
                    }
                    Quantity::Weight => {
                        let per: Vec<&Estimates<CategoryPair>> = reps
                            .iter()
                            .map(|r| match &r[&key] {
                                CellEstimates::Weights(w) => w,
                                CellEstimates::Sizes(_) => unreachable!("weight cell"),
                            })
                            .collect();
                        summarize(key, &exact.weights, &per, &probes)
                    }
                };
                cells.push(report);
            }
        }
    }
    Ok(ExperimentReport {
        node_count: g.node_count(),
        edge_count: g.edge_count(),
        replicates: cfg.replicates,
        seed: cfg.seed,
        cells,
    })
}
