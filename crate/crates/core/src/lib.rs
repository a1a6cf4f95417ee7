//! Core library for analyzing the relationship between a formal
//! organizational tree and a weighted directed communication graph.
//!
//! The crate couples two structures over a shared set of employees:
//! a rooted reporting tree ([`OrgTree`]) and a sparse directed graph of
//! monthly message counts ([`CommGraph`]). On top of these it provides
//!
//! * an ingestion pipeline that parses CSV edge lists and cleans them
//!   into a harmonized [`Dataset`] ([`ingest`]),
//! * tree path decompositions and the reporting distances RD/SRD/DRD,
//!   with per-team distance profiles ([`distance`]),
//! * communication-structure measures: degrees and strengths, power-law
//!   fits, modularity, team mixing, EI indices, reciprocity, positional
//!   statistics, and centralities ([`measures`]),
//! * a seeded permutation test of communication symmetry about zero
//!   signed distance ([`permtest`]),
//! * hierarchy reconstruction methods (min/max spanning tree, rank
//!   assignment by agony minimization, greedy distance-decay placement)
//!   and their evaluation suite ([`reconstruct`]),
//! * synthetic organizations with distance-decay traffic that serve as
//!   planted ground truth ([`synth`]),
//! * deterministic CSV/JSON renderings of every result table ([`report`]).
//!
//! All bulk computations are data-parallel over nodes, teams, or
//! replicates when the `parallel` feature (default) is enabled, and fall
//! back to equivalent sequential loops without it. Results are
//! bit-identical across thread counts: floating-point reductions always
//! happen in a fixed order and random streams are derived per work item.

pub mod distance;
pub mod error;
pub mod ingest;
pub mod measures;
pub mod org;
pub(crate) mod par;
pub mod permtest;
pub mod reconstruct;
pub mod report;
pub mod synth;

pub use error::{DistanceError, IngestError, MeasureError, OrgError, ReconstructError};
pub use org::{CommGraph, Dataset, EmployeeId, NodeIx, OrgTree, TeamPartition};

/// Sets the worker count for all parallel loops (once per process).
/// Without the `parallel` feature this is a no-op: everything runs
/// sequentially. Returns the effective worker count.
pub fn configure_threads(n: Option<usize>) -> usize {
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = n {
            let n = n.max(1);
            // Ignore the error if a global pool already exists.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            return n;
        }
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        1
    }
}
