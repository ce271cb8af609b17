//! Estimation of coarse-grained category graphs from samples of a large
//! graph whose nodes are partitioned into categories.
//!
//! The pipeline is: build or load a [`Graph`] with a [`CategoryPartition`],
//! draw a [`SampleTrace`] with one of the samplers, turn it into an
//! [`ObservationLog`] under induced or star observation, and estimate
//! category sizes and edge weights from the log.

pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod generators;
pub mod graph;
pub mod io;
pub mod observers;
pub mod samplers;

pub use error::{Error, Result};
pub use estimators::{
    bootstrap_variance, estimate_category_graph, CategoryGraphEstimate, EstimateOptions,
    EstimatorKind, Population, Quantity,
};
pub use evaluation::{nrmse, run_experiment, ExperimentConfig, ExperimentReport};
pub use generators::{synthetic_graph, SyntheticParams};
pub use graph::{exact_category_graph, CategoryGraph, CategoryId, CategoryPair, CategoryPartition, Graph, NodeId};
pub use observers::{observe, ObservationLog, ObservationMode};
pub use samplers::{run_plan, Design, SampleTrace, SamplerKind, SamplingPlan};
