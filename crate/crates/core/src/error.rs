use std::io;

use thiserror::Error;

use crate::graph::{CategoryId, NodeId};
use crate::observers::ObservationMode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node {0} is out of range")]
    InvalidNode(NodeId),
    #[error("unknown category {0}")]
    UnknownCategory(CategoryId),
    #[error("category {0} has no members")]
    EmptyCategory(CategoryId),
    #[error("edge weights are only defined between distinct categories")]
    SelfPairNotSupported,
    #[error("partition labels {labels} nodes but the graph has {nodes}")]
    PartitionMismatch { labels: usize, nodes: usize },

    #[error("no simple {k}-regular graph on {size} nodes")]
    InfeasibleRegularGraph { size: usize, k: usize },
    #[error("regular graph generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error("requested {requested} inter-category edges but only {available} pairs are free")]
    TooManyEdgesRequested { requested: usize, available: usize },
    #[error("alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),

    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("sample size must be at least 1")]
    InvalidSampleSize,
    #[error("weight of node {node} must be positive and finite, got {weight}")]
    InvalidWeight { node: NodeId, weight: f64 },
    #[error("category weight of {category} must be positive and finite, got {weight}")]
    InvalidCategoryWeight { category: CategoryId, weight: f64 },
    #[error("start node {0} has no neighbors")]
    IsolatedStartNode(NodeId),
    #[error("thinning interval must be at least 1")]
    InvalidThinning,

    #[error("observation log has no records")]
    EmptySample,
    #[error("estimator needs {expected} observation, got {found}")]
    WrongObservationMode {
        expected: ObservationMode,
        found: ObservationMode,
    },
    #[error("not enough draws to estimate this quantity")]
    InsufficientSample,
    #[error("size estimate missing for category {0}")]
    MissingSizeEstimate(CategoryId),
    #[error("bootstrap needs at least 2 resamples, got {0}")]
    InvalidBootstrap(usize),

    #[error("NRMSE is undefined for a true value of zero")]
    UndefinedNrmse,
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: u64 },
    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: u64, v: u64 },
    #[error("line {line}: node {node} labeled twice")]
    DuplicateLabel { line: usize, node: u64 },
    #[error("node {0} has no category")]
    UnlabeledNode(u64),

    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable identifier used in the CLI's error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidNode(_) => "InvalidNode",
            Error::UnknownCategory(_) => "UnknownCategory",
            Error::EmptyCategory(_) => "EmptyCategory",
            Error::SelfPairNotSupported => "SelfPairNotSupported",
            Error::PartitionMismatch { .. } => "PartitionMismatch",
            Error::InfeasibleRegularGraph { .. } => "InfeasibleRegularGraph",
            Error::GenerationFailed { .. } => "GenerationFailed",
            Error::TooManyEdgesRequested { .. } => "TooManyEdgesRequested",
            Error::InvalidAlpha(_) => "InvalidAlpha",
            Error::EmptyGraph => "EmptyGraph",
            Error::InvalidSampleSize => "InvalidSampleSize",
            Error::InvalidWeight { .. } => "InvalidWeight",
            Error::InvalidCategoryWeight { .. } => "InvalidCategoryWeight",
            Error::IsolatedStartNode(_) => "IsolatedStartNode",
            Error::InvalidThinning => "InvalidThinning",
            Error::EmptySample => "EmptySample",
            Error::WrongObservationMode { .. } => "WrongObservationMode",
            Error::InsufficientSample => "InsufficientSample",
            Error::MissingSizeEstimate(_) => "MissingSizeEstimate",
            Error::InvalidBootstrap(_) => "InvalidBootstrap",
            Error::UndefinedNrmse => "UndefinedNRMSE",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Parse { .. } => "ParseError",
            Error::SelfLoop { .. } => "SelfLoop",
            Error::DuplicateEdge { .. } => "DuplicateEdge",
            Error::DuplicateLabel { .. } => "DuplicateLabel",
            Error::UnlabeledNode(_) => "UnlabeledNode",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }
}
