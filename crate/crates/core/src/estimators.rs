//! Category size and edge weight estimators.
//!
//! Every estimator is written in Hansen-Hurwitz ratio form over per-draw
//! weights `w(v)`: draws enter divided by their weight and the unknown
//! normalizing constant of the sampling distribution cancels. With all
//! weights equal to 1 the formulas reduce exactly to the plain counting
//! estimators for uniform samples.
//!
//! | quantity | induced observation | star observation |
//! |---|---|---|
//! | `|A|` | `N * w₋₁(S_A) / w₋₁(S)` | `N * f̂vol_A * k̂_V / k̂_A` |
//! | `w(A,B)` | `Σ 1{ab∈E}/(w(a)w(b)) / (w₋₁(S_A) w₋₁(S_B))` | `(Σ_a E_aB/w(a) + Σ_b E_bA/w(b)) / (w₋₁(S_A)|B̂| + w₋₁(S_B)|Â|)` |
//!
//! where `w₋₁(X) = Σ_{v∈X} 1/w(v)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CategoryGraph, CategoryId, CategoryPair, NodeId};
use crate::observers::{ObservationLog, ObservationMode, Record};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Induced,
    Star,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Induced => "induced",
            EstimatorKind::Star => "star",
        }
    }

    /// Observation mode the estimator needs. The induced size estimator
    /// reads only the categories of drawn nodes and accepts either mode.
    fn required_mode(self, quantity: Quantity) -> Option<ObservationMode> {
        match (self, quantity) {
            (EstimatorKind::Induced, Quantity::Size) => None,
            (EstimatorKind::Induced, Quantity::Weight) => Some(ObservationMode::Induced),
            (EstimatorKind::Star, _) => Some(ObservationMode::Star),
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "induced" => Ok(EstimatorKind::Induced),
            "star" => Ok(EstimatorKind::Star),
            other => Err(format!("unknown estimator `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Size,
    Weight,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::Size => "size",
            Quantity::Weight => "weight",
        })
    }
}

/// Population size used to scale category sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Population {
    Exact(usize),
    /// `N` unknown; sizes are reported with `N = 1`, i.e. up to a common
    /// constant factor. Size ratios are unaffected.
    Proportional,
}

impl Population {
    pub fn value(self) -> f64 {
        match self {
            Population::Exact(n) => n as f64,
            Population::Proportional => 1.0,
        }
    }
}

impl FromStr for Population {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "proportional" {
            return Ok(Population::Proportional);
        }
        s.strip_prefix("exact:")
            .and_then(|n| n.parse().ok())
            .map(Population::Exact)
            .ok_or_else(|| format!("expected `exact:<N>` or `proportional`, got `{s}`"))
    }
}

/// Why an individual quantity has no estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unavailable {
    InsufficientSample,
    MissingSizeEstimate(CategoryId),
}

impl From<Unavailable> for Error {
    fn from(u: Unavailable) -> Self {
        match u {
            Unavailable::InsufficientSample => Error::InsufficientSample,
            Unavailable::MissingSizeEstimate(c) => Error::MissingSizeEstimate(c),
        }
    }
}

/// Per-key estimates; keys whose estimator is undefined carry the reason.
pub type Estimates<K> = BTreeMap<K, std::result::Result<f64, Unavailable>>;

/// Keeps only the available values.
pub fn available<K: Ord + Copy>(estimates: &Estimates<K>) -> BTreeMap<K, f64> {
    estimates
        .iter()
        .filter_map(|(&k, v)| v.ok().map(|x| (k, x)))
        .collect()
}

/// `w₋₁(X) = Σ_{v∈X} 1/w(v)` over a multiset of draws.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct ReweightedSize(f64);

impl ReweightedSize {
    pub fn of<'a>(records: impl IntoIterator<Item = &'a Record>) -> Self {
        Self(records.into_iter().map(|r| r.weight.recip()).sum())
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Hansen-Hurwitz estimate of a population total, `(1/n) Σ x(v)/π(v)`, with
/// `π(v) = weights[v] / normalizer`.
pub fn hh_total(values: &[f64], weights: &[f64], normalizer: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if values.len() != weights.len() {
        return Err(Error::InvalidSampleSize);
    }
    let sum: f64 = values
        .iter()
        .zip(weights)
        .map(|(x, w)| x / (w / normalizer))
        .sum();
    Ok(sum / values.len() as f64)
}

/// Ratio of two Hansen-Hurwitz totals, `Σ x/w / Σ y/w`. Only the relative
/// weights matter.
pub fn hh_ratio(numerator: &[f64], denominator: &[f64], weights: &[f64]) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::EmptySample);
    }
    if numerator.len() != weights.len() || denominator.len() != weights.len() {
        return Err(Error::InvalidSampleSize);
    }
    let num: f64 = numerator.iter().zip(weights).map(|(x, w)| x / w).sum();
    let den: f64 = denominator.iter().zip(weights).map(|(y, w)| y / w).sum();
    Ok(num / den)
}

/// Weighted per-category sums over a log, computed in one pass.
#[derive(Debug, Clone)]
struct Tallies {
    /// `w₋₁(S_A)`
    inv_w: Vec<f64>,
    /// `Σ_{S_A} deg/w`
    deg_w: Vec<f64>,
    inv_w_all: f64,
    deg_w_all: f64,
    /// Star only: `cross[a][b] = Σ_{s∈S_a} |E_{s,b}|/w(s)`.
    cross: Vec<Vec<f64>>,
}

impl Tallies {
    fn new(log: &ObservationLog) -> Self {
        let c = log.category_count();
        let star = log.mode == ObservationMode::Star;
        let mut t = Tallies {
            inv_w: vec![0.0; c],
            deg_w: vec![0.0; c],
            inv_w_all: 0.0,
            deg_w_all: 0.0,
            cross: if star { vec![vec![0.0; c]; c] } else { Vec::new() },
        };
        let w_ref = reference_weight(log);
        for r in &log.records {
            let a = r.category.index();
            let w = r.weight / w_ref;
            let inv = w.recip();
            let deg = r.degree as f64 / w;
            t.inv_w[a] += inv;
            t.deg_w[a] += deg;
            t.inv_w_all += inv;
            t.deg_w_all += deg;
            if let (true, Some(hist)) = (star, &r.neighbor_categories) {
                for (&b, &count) in hist {
                    t.cross[a][b.index()] += count as f64 / w;
                }
            }
        }
        t
    }

    /// `Σ_{s∈S} |N(s) ∩ A| / w(s)`
    fn neighbors_in(&self, a: usize) -> f64 {
        self.cross.iter().map(|row| row[a]).sum()
    }
}

/// Weights enter every ratio only up to a common factor; dividing by the
/// first draw's weight makes constant weights exactly 1.
fn reference_weight(log: &ObservationLog) -> f64 {
    log.records.first().map_or(1.0, |r| r.weight)
}

fn check_nonempty(log: &ObservationLog) -> Result<()> {
    if log.is_empty() {
        Err(Error::EmptySample)
    } else {
        Ok(())
    }
}

/// `|Â| = N * w₋₁(S_A) / w₋₁(S)`; categories without draws get 0.
pub fn est_size_induced(log: &ObservationLog, population: f64) -> Result<Estimates<CategoryId>> {
    check_nonempty(log)?;
    let t = Tallies::new(log);
    Ok(size_induced(log, &t, population))
}

fn size_induced(log: &ObservationLog, t: &Tallies, population: f64) -> Estimates<CategoryId> {
    log.categories()
        .map(|a| (a, Ok(population * (t.inv_w[a.index()] / t.inv_w_all))))
        .collect()
}

/// `(k̂_V, k̂_A)`: weighted mean degree of the whole graph and per category.
pub fn est_mean_degrees(log: &ObservationLog) -> Result<(f64, Estimates<CategoryId>)> {
    check_nonempty(log)?;
    let t = Tallies::new(log);
    Ok(mean_degrees(log, &t))
}

fn mean_degrees(log: &ObservationLog, t: &Tallies) -> (f64, Estimates<CategoryId>) {
    let k_v = t.deg_w_all / t.inv_w_all;
    let k_a = log
        .categories()
        .map(|a| {
            let i = a.index();
            let k = if t.inv_w[i] > 0.0 {
                Ok(t.deg_w[i] / t.inv_w[i])
            } else {
                Err(Unavailable::InsufficientSample)
            };
            (a, k)
        })
        .collect();
    (k_v, k_a)
}

/// Star-based relative volume `f̂vol_A`, from the neighbor categories of
/// every draw. Values sum to 1 over categories.
pub fn est_fvol_star(log: &ObservationLog) -> Result<BTreeMap<CategoryId, f64>> {
    log.require_mode(ObservationMode::Star)?;
    check_nonempty(log)?;
    let t = Tallies::new(log);
    fvol_star(log, &t)
}

fn fvol_star(log: &ObservationLog, t: &Tallies) -> Result<BTreeMap<CategoryId, f64>> {
    if t.deg_w_all <= 0.0 {
        // Every draw was isolated.
        return Err(Error::InsufficientSample);
    }
    Ok(log
        .categories()
        .map(|a| (a, t.neighbors_in(a.index()) / t.deg_w_all))
        .collect())
}

/// `|Â| = N * f̂vol_A * k̂_V / k̂_A`. Categories without draws have no
/// estimate unless `assume_homogeneous_degree` substitutes `k̂_V` for `k̂_A`.
pub fn est_size_star(
    log: &ObservationLog,
    population: f64,
    assume_homogeneous_degree: bool,
) -> Result<Estimates<CategoryId>> {
    log.require_mode(ObservationMode::Star)?;
    check_nonempty(log)?;
    let t = Tallies::new(log);
    size_star(log, &t, population, assume_homogeneous_degree)
}

fn size_star(
    log: &ObservationLog,
    t: &Tallies,
    population: f64,
    assume_homogeneous_degree: bool,
) -> Result<Estimates<CategoryId>> {
    let fvol = fvol_star(log, t)?;
    let (k_v, k_a) = mean_degrees(log, t);
    Ok(fvol
        .into_iter()
        .map(|(a, f)| {
            let k = if assume_homogeneous_degree {
                Ok(k_v)
            } else {
                k_a[&a]
            };
            let size = match k {
                Ok(k) if k > 0.0 => Ok(population * f * (k_v / k)),
                _ => Err(Unavailable::InsufficientSample),
            };
            (a, size)
        })
        .collect())
}

/// Per-node `Σ_{draws of v} 1/w`, the multiplicity of `v` in re-weighted form.
fn node_multiplicities(log: &ObservationLog) -> BTreeMap<NodeId, (CategoryId, f64)> {
    let w_ref = reference_weight(log);
    let mut m: BTreeMap<NodeId, (CategoryId, f64)> = BTreeMap::new();
    for r in &log.records {
        m.entry(r.node).or_insert((r.category, 0.0)).1 += (r.weight / w_ref).recip();
    }
    m
}

/// Induced-subgraph edge weight estimator.
///
/// The double sum over draw pairs `a ∈ S_A, b ∈ S_B` is evaluated per
/// observed edge `{u,v}` as `m(u) * m(v)` with `m` the re-weighted draw
/// multiplicity, which counts repeated draws exactly as the pair sum does.
pub fn est_weight_induced(log: &ObservationLog) -> Result<Estimates<CategoryPair>> {
    log.require_mode(ObservationMode::Induced)?;
    check_nonempty(log)?;
    let t = Tallies::new(log);
    let mult = node_multiplicities(log);
    let mut numer: BTreeMap<CategoryPair, f64> = BTreeMap::new();
    for &(u, v) in &log.induced_edges {
        let (Some(&(a, mu)), Some(&(b, mv))) = (mult.get(&u), mult.get(&v)) else {
            continue;
        };
        if a != b {
            *numer.entry(CategoryPair::new(a, b)?).or_insert(0.0) += mu * mv;
        }
    }
    Ok(CategoryPair::all(log.category_count())
        .map(|pair| {
            let (ia, ib) = (pair.lo().index(), pair.hi().index());
            let value = if t.inv_w[ia] > 0.0 && t.inv_w[ib] > 0.0 {
                let num = numer.get(&pair).copied().unwrap_or(0.0);
                Ok(num / (t.inv_w[ia] * t.inv_w[ib]))
            } else {
                Err(Unavailable::InsufficientSample)
            };
            (pair, value)
        })
        .collect())
}

/// Star edge weight estimator. `sizes` supplies `|Â|`, from either size
/// estimator or from outside knowledge. A one-sided sample (only `S_A`
/// nonempty) still yields an estimate.
pub fn est_weight_star(
    log: &ObservationLog,
    sizes: &BTreeMap<CategoryId, f64>,
) -> Result<Estimates<CategoryPair>> {
    log.require_mode(ObservationMode::Star)?;
    check_nonempty(log)?;
    let t = Tallies::new(log);
    Ok(weight_star(log, &t, sizes))
}

fn weight_star(
    log: &ObservationLog,
    t: &Tallies,
    sizes: &BTreeMap<CategoryId, f64>,
) -> Estimates<CategoryPair> {
    CategoryPair::all(log.category_count())
        .map(|pair| (pair, weight_star_pair(t, sizes, pair)))
        .collect()
}

fn weight_star_pair(
    t: &Tallies,
    sizes: &BTreeMap<CategoryId, f64>,
    pair: CategoryPair,
) -> std::result::Result<f64, Unavailable> {
    let (a, b) = (pair.lo(), pair.hi());
    let (ia, ib) = (a.index(), b.index());
    let (inv_a, inv_b) = (t.inv_w[ia], t.inv_w[ib]);
    if inv_a == 0.0 && inv_b == 0.0 {
        return Err(Unavailable::InsufficientSample);
    }
    // A size is needed only when the opposite side was sampled.
    let size = |c: CategoryId, coefficient: f64| -> std::result::Result<f64, Unavailable> {
        if coefficient == 0.0 {
            Ok(0.0)
        } else {
            sizes
                .get(&c)
                .copied()
                .ok_or(Unavailable::MissingSizeEstimate(c))
        }
    };
    let size_b = size(b, inv_a)?;
    let size_a = size(a, inv_b)?;
    let numerator = t.cross[ia][ib] + t.cross[ib][ia];
    let denominator = inv_a * size_b + inv_b * size_a;
    if denominator > 0.0 && denominator.is_finite() {
        Ok(numerator / denominator)
    } else {
        Err(Unavailable::InsufficientSample)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimateOptions {
    pub size_estimator: EstimatorKind,
    pub weight_estimator: EstimatorKind,
    /// Replace `k̂_A` by `k̂_V` in the star size estimator.
    pub assume_homogeneous_degree: bool,
}

impl EstimateOptions {
    pub fn new(size_estimator: EstimatorKind, weight_estimator: EstimatorKind) -> Self {
        Self {
            size_estimator,
            weight_estimator,
            assume_homogeneous_degree: false,
        }
    }

    pub fn check(&self, mode: ObservationMode) -> Result<()> {
        for (kind, quantity) in [
            (self.size_estimator, Quantity::Size),
            (self.weight_estimator, Quantity::Weight),
        ] {
            if let Some(expected) = kind.required_mode(quantity) {
                if expected != mode {
                    return Err(Error::WrongObservationMode {
                        expected,
                        found: mode,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Estimated (or exact) category graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryGraphEstimate {
    pub population: Population,
    /// `None` marks exact ground truth.
    pub size_estimator: Option<EstimatorKind>,
    pub weight_estimator: Option<EstimatorKind>,
    pub names: Vec<String>,
    /// Categories without an estimate are absent.
    pub sizes: BTreeMap<CategoryId, f64>,
    /// Pairs without an estimate are absent; estimated zeros are kept.
    pub weights: BTreeMap<CategoryPair, f64>,
    pub size_variances: Option<BTreeMap<CategoryId, f64>>,
    pub weight_variances: Option<BTreeMap<CategoryPair, f64>>,
}

impl CategoryGraphEstimate {
    pub fn from_exact(exact: &CategoryGraph) -> Self {
        Self {
            population: Population::Exact(exact.node_count()),
            size_estimator: None,
            weight_estimator: None,
            names: exact.names.clone(),
            sizes: exact
                .sizes
                .iter()
                .enumerate()
                .map(|(c, &s)| (CategoryId(c), s as f64))
                .collect(),
            weights: exact.weights.clone(),
            size_variances: None,
            weight_variances: None,
        }
    }

    pub fn category_count(&self) -> usize {
        self.names.len()
    }

    pub fn weight(&self, a: CategoryId, b: CategoryId) -> Option<f64> {
        CategoryPair::new(a, b)
            .ok()
            .and_then(|p| self.weights.get(&p).copied())
    }
}

/// Raw per-quantity estimates, including the reason for missing ones.
#[derive(Debug, Clone, PartialEq)]
pub struct RawEstimate {
    pub sizes: Estimates<CategoryId>,
    pub weights: Estimates<CategoryPair>,
}

/// Runs the chosen size and weight estimators on one log. The star weight
/// estimator is fed by the chosen size estimator.
pub fn estimate_raw(
    log: &ObservationLog,
    population: Population,
    opts: EstimateOptions,
) -> Result<RawEstimate> {
    opts.check(log.mode)?;
    check_nonempty(log)?;
    let n = population.value();
    let t = Tallies::new(log);
    let sizes = match opts.size_estimator {
        EstimatorKind::Induced => size_induced(log, &t, n),
        EstimatorKind::Star => size_star(log, &t, n, opts.assume_homogeneous_degree)?,
    };
    let weights = match opts.weight_estimator {
        EstimatorKind::Induced => est_weight_induced(log)?,
        EstimatorKind::Star => weight_star(log, &t, &available(&sizes)),
    };
    Ok(RawEstimate { sizes, weights })
}

pub fn estimate_category_graph(
    log: &ObservationLog,
    population: Population,
    opts: EstimateOptions,
) -> Result<CategoryGraphEstimate> {
    let raw = estimate_raw(log, population, opts)?;
    Ok(CategoryGraphEstimate {
        population,
        size_estimator: Some(opts.size_estimator),
        weight_estimator: Some(opts.weight_estimator),
        names: log.category_names.clone(),
        sizes: available(&raw.sizes),
        weights: available(&raw.weights),
        size_variances: None,
        weight_variances: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variances {
    pub sizes: BTreeMap<CategoryId, f64>,
    pub weights: BTreeMap<CategoryPair, f64>,
}

/// Bootstrap variance of every estimated quantity: `b` resamples of the
/// draws with replacement, each re-estimated. A quantity gets a variance
/// when at least two resamples produced it.
pub fn bootstrap_variance<R: Rng + ?Sized>(
    log: &ObservationLog,
    population: Population,
    opts: EstimateOptions,
    b: usize,
    rng: &mut R,
) -> Result<Variances> {
    if b < 2 {
        return Err(Error::InvalidBootstrap(b));
    }
    opts.check(log.mode)?;
    check_nonempty(log)?;
    let seeds: Vec<u64> = (0..b).map(|_| rng.gen()).collect();
    let n = log.len();
    let replicates: Vec<RawEstimate> = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let records = (0..n)
                .map(|_| log.records[rng.gen_range(0..n)].clone())
                .collect();
            estimate_raw(&log.with_records(records), population, opts)
        })
        .collect::<Result<_>>()?;

    fn variance<K: Ord + Copy>(per_rep: impl Iterator<Item = BTreeMap<K, f64>>) -> BTreeMap<K, f64> {
        let mut values: BTreeMap<K, Vec<f64>> = BTreeMap::new();
        for rep in per_rep {
            for (k, v) in rep {
                values.entry(k).or_default().push(v);
            }
        }
        values
            .into_iter()
            .filter(|(_, xs)| xs.len() >= 2)
            .map(|(k, xs)| (k, sample_variance(&xs)))
            .collect()
    }

    Ok(Variances {
        sizes: variance(replicates.iter().map(|r| available(&r.sizes))),
        weights: variance(replicates.iter().map(|r| available(&r.weights))),
    })
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}
