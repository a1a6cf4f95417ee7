//! Error types, one enum per subsystem.

use thiserror::Error;

/// Errors from building or querying organizational structures.
#[derive(Debug, Error)]
pub enum OrgError {
    #[error("multiple roots found: {0:?}")]
    MultipleRoots(Vec<String>),
    #[error("cycle detected through nodes {0:?}")]
    CycleDetected(Vec<String>),
    #[error("node {child} has more than one parent ({first}, {second})")]
    DuplicateParent {
        child: String,
        first: String,
        second: String,
    },
    #[error("node {0} is not reachable from the declared root")]
    DisconnectedNode(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("unknown team {0}")]
    UnknownTeam(String),
    #[error("empty edge list and no declared root")]
    EmptyTree,
    #[error("self-loop on node {0}")]
    SelfLoop(String),
    #[error("non-positive count on edge {src} -> {dst}")]
    NonPositiveCount { src: String, dst: String },
    #[error("node sets of tree and communication graph differ (e.g. {0})")]
    NodeSetMismatch(String),
}

/// Errors from parsing raw files and running the cleaning pipeline.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: missing or wrong header, expected {expected:?}")]
    MissingHeader { path: String, expected: String },
    #[error("{path}:{line}: malformed row")]
    MalformedRow { path: String, line: usize },
    #[error("{path}:{line}: count must be a positive integer")]
    NegativeCount { path: String, line: usize },
    #[error("{path}:{line}: self-loop {id} -> {id}")]
    SelfLoop {
        path: String,
        line: usize,
        id: String,
    },
    #[error("tree and communication graph share no node ids")]
    EmptyIntersection,
    #[error(transparent)]
    Org(#[from] OrgError),
}

/// Errors from reporting-distance computations.
#[derive(Debug, Error)]
pub enum DistanceError {
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("unknown team {0}")]
    UnknownTeam(String),
    #[error("primes p={p}, q={q} cannot encode a tree of depth {depth} (need q*depth < p)")]
    PrimeCapacityExceeded { p: u64, q: u64, depth: u64 },
}

/// Errors from statistical measures.
#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),
    #[error("communication graph has no edges")]
    EmptyGraph,
    #[error("power iteration did not converge within {0} iterations")]
    NotConverged(usize),
    #[error("unknown statistic {0}")]
    UnknownStatistic(String),
}

/// Errors from reconstruction and evaluation.
#[derive(Debug, Error)]
pub enum ReconstructError {
    #[error("symmetrized communication graph is disconnected ({0} components)")]
    Disconnected(usize),
    #[error("estimate is not a tree: {0}")]
    NotATree(String),
    #[error("root {0} absent from estimate")]
    RootAbsent(String),
    #[error("node sets differ between truth and estimate (e.g. {0})")]
    NodeSetMismatch(String),
}
